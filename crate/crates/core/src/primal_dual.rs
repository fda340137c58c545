//! Dual oracles for `min { f(x) : x ∈ Q, Ax = b }` and the primal-dual solvers
//! APDAGD, APDSGM and PDUGDsDR.
//!
//! The dual is `φ(λ) = ⟨λ, b⟩ + max_{x∈Q} (−f(x) − ⟨Aᵀλ, x⟩)` with `∇φ(λ) = b − A x(λ)`.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::rng::{self, StreamRng};
use crate::scalar::Real;
use crate::trace::{is_logged, Trace};

/// Linearly constrained problem with an exact inner solver.
pub trait LinConstrainedProblem<T: Real> {
    fn primal_dim(&self) -> usize;
    fn dual_dim(&self) -> usize;
    fn objective(&self, x: &[T]) -> T;
    /// `x(λ) = argmax_{x∈Q} (−f(x) − ⟨Aᵀλ, x⟩)`.
    fn x_of(&self, lambda: &[T]) -> Result<Vec<T>>;
    fn apply_a(&self, x: &[T]) -> Vec<T>;
    fn b(&self) -> &[T];
    /// Strong convexity of `f` w.r.t. the primal norm (0 if none).
    fn gamma(&self) -> T;
    /// `‖A‖_{E→H}` for the primal norm and the ℓ2 norm on `H`.
    fn a_norm(&self) -> T;
}

/// Dual value, gradient and the inner solution at `λ`.
#[derive(Clone, Debug)]
pub struct DualEval<T> {
    pub phi: T,
    pub grad: Vec<T>,
    pub x: Vec<T>,
}

pub fn dual_oracle<T: Real, P: LinConstrainedProblem<T> + ?Sized>(p: &P, lambda: &[T]) -> Result<DualEval<T>> {
    let x = p.x_of(lambda)?;
    let ax = p.apply_a(&x);
    let grad = linalg::sub(p.b(), &ax);
    let phi = linalg::dot(lambda, &grad) - p.objective(&x);
    if !phi.is_finite() || !linalg::all_finite(&grad) {
        return Err(Error::Oracle("non-finite dual value".into()));
    }
    Ok(DualEval { phi, grad, x })
}

pub fn residual<T: Real, P: LinConstrainedProblem<T> + ?Sized>(p: &P, x: &[T]) -> T {
    linalg::norm2(&linalg::sub(&p.apply_a(x), p.b()))
}

/// Separable objective on a box (or the whole space).
#[derive(Clone, Debug, PartialEq)]
pub enum Separable<T> {
    /// `½ s ‖x − c‖₂²`.
    Quadratic { s: T, c: Vec<T> },
    /// `⟨c, x⟩`; requires a bounded box.
    Linear { c: Vec<T> },
}

/// Dense problem with separable `f` and `Q` a box or `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct DenseProblem<T> {
    pub f: Separable<T>,
    pub a: Mat<T>,
    pub b: Vec<T>,
    pub bounds: Option<(Vec<T>, Vec<T>)>,
    a_norm: T,
}

impl<T: Real> DenseProblem<T> {
    pub fn new(f: Separable<T>, a: Mat<T>, b: Vec<T>, bounds: Option<(Vec<T>, Vec<T>)>) -> Result<Self> {
        let n = match &f {
            Separable::Quadratic { s, c } => {
                if !(*s > T::zero()) {
                    return Err(Error::InvalidParameter("quadratic weight must be positive".into()));
                }
                c.len()
            }
            Separable::Linear { c } => {
                if bounds.is_none() {
                    return Err(Error::InvalidInput("linear objective needs a bounded box".into()));
                }
                c.len()
            }
        };
        if a.cols != n || a.rows != b.len() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        if let Some((lo, hi)) = &bounds {
            if lo.len() != n || hi.len() != n || lo.iter().zip(hi).any(|(l, h)| l > h) {
                return Err(Error::InvalidInput("bad box".into()));
            }
        }
        let a_norm = a.op_norm2();
        Ok(DenseProblem { f, a, b, bounds, a_norm })
    }

    /// Projection of `c` onto `{x : 1ᵀx = 1}` written as `min ½‖x − c‖² s.t. 1ᵀx = 1`.
    pub fn hyperplane_projection(c: Vec<T>) -> Self {
        let n = c.len();
        Self::new(Separable::Quadratic { s: T::one(), c }, Mat::from_fn(1, n, |_, _| T::one()), vec![T::one()], None).expect("valid problem")
    }

    /// Closed-form dual solution of [`Self::hyperplane_projection`].
    pub fn hyperplane_lambda_star(c: &[T]) -> T {
        (linalg::sum(c) - T::one()) / T::of_usize(c.len())
    }
}

impl<T: Real> LinConstrainedProblem<T> for DenseProblem<T> {
    fn primal_dim(&self) -> usize {
        self.a.cols
    }
    fn dual_dim(&self) -> usize {
        self.a.rows
    }
    fn objective(&self, x: &[T]) -> T {
        match &self.f {
            Separable::Quadratic { s, c } => *s * T::of(0.5) * linalg::norm2_sq(&linalg::sub(x, c)),
            Separable::Linear { c } => linalg::dot(c, x),
        }
    }
    fn x_of(&self, lambda: &[T]) -> Result<Vec<T>> {
        let atl = self.a.tmatvec(lambda);
        let mut x: Vec<T> = match &self.f {
            Separable::Quadratic { s, c } => c.iter().zip(&atl).map(|(&ci, &ai)| ci - ai / *s).collect(),
            Separable::Linear { c } => {
                let (lo, hi) = self.bounds.as_ref().expect("checked in new");
                (0..c.len()).map(|i| if c[i] + atl[i] < T::zero() { hi[i] } else { lo[i] }).collect()
            }
        };
        if let (Separable::Quadratic { .. }, Some((lo, hi))) = (&self.f, &self.bounds) {
            for i in 0..x.len() {
                x[i] = x[i].max(lo[i]).min(hi[i]);
            }
        }
        Ok(x)
    }
    fn apply_a(&self, x: &[T]) -> Vec<T> {
        self.a.matvec(x)
    }
    fn b(&self) -> &[T] {
        &self.b
    }
    fn gamma(&self) -> T {
        match &self.f {
            Separable::Quadratic { s, .. } => *s,
            Separable::Linear { .. } => T::zero(),
        }
    }
    fn a_norm(&self) -> T {
        self.a_norm
    }
}

/// `min ½‖x‖² s.t. Dx = b` with `D` the forward difference `(Dx)_i = x_i − x_{i+1}`.
///
/// The dual Hessian `DDᵀ` is the path Laplacian, the classical hard quadratic for first-order methods.
#[derive(Clone, Debug)]
pub struct ChainProblem<T> {
    pub b: Vec<T>,
}

impl<T: Real> ChainProblem<T> {
    /// `b = e₁`.
    pub fn unit(m: usize) -> Self {
        let mut b = vec![T::zero(); m];
        b[0] = T::one();
        ChainProblem { b }
    }
}

impl<T: Real> LinConstrainedProblem<T> for ChainProblem<T> {
    fn primal_dim(&self) -> usize {
        self.b.len()
    }
    fn dual_dim(&self) -> usize {
        self.b.len()
    }
    fn objective(&self, x: &[T]) -> T {
        T::of(0.5) * linalg::norm2_sq(x)
    }
    fn x_of(&self, l: &[T]) -> Result<Vec<T>> {
        Ok((0..l.len()).map(|j| if j > 0 { l[j - 1] - l[j] } else { -l[0] }).collect())
    }
    fn apply_a(&self, x: &[T]) -> Vec<T> {
        let m = x.len();
        (0..m).map(|i| if i + 1 < m { x[i] - x[i + 1] } else { x[i] }).collect()
    }
    fn b(&self) -> &[T] {
        &self.b
    }
    fn gamma(&self) -> T {
        T::one()
    }
    fn a_norm(&self) -> T {
        T::of(2.0)
    }
}

/// `16‖A‖²R²/(γk²)` and `16‖A‖²R/(γk²)`.
pub fn apdagd_bounds(a_norm: f64, r: f64, gamma: f64, k: usize) -> (f64, f64) {
    let k2 = (k * k) as f64;
    (16.0 * a_norm * a_norm * r * r / (gamma * k2), 16.0 * a_norm * a_norm * r / (gamma * k2))
}

/// `32LR²/N² + ε/2` and `32LR/N² + ε/(2R)`.
pub fn apdsgm_bounds(l: f64, r: f64, eps: f64, n: usize) -> (f64, f64) {
    let n2 = (n * n) as f64;
    (32.0 * l * r * r / n2 + eps / 2.0, 32.0 * l * r / n2 + eps / (2.0 * r))
}

/// `2R²/A_k + ε/2` and `2R/A_k + ε/(2R)`.
pub fn pdugdsdr_bounds(r: f64, a_k: f64, eps: f64) -> (f64, f64) {
    (2.0 * r * r / a_k + eps / 2.0, 2.0 * r / a_k + eps / (2.0 * r))
}

const TRACE_COLS: [&str; 9] = ["k", "dual", "primal", "gap", "feasibility", "m_or_a", "inner_steps", "oracle_calls", "eta_norm"];

#[derive(Clone, Debug)]
pub struct PdRun<T> {
    pub x_hat: Vec<T>,
    pub eta: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Iterations where `⟨∇φ(λ), ζ − λ⟩ ≥ 0` failed beyond rounding (PDUGDsDR only).
    pub sign_violations: usize,
    /// Columns: `k, dual, primal, gap, feasibility, m_or_a, inner_steps, oracle_calls, eta_norm`.
    pub trace: Trace,
}

#[derive(Clone, Debug)]
pub struct ApdagdOptions<T> {
    pub l0: T,
    pub eps_f: T,
    pub eps_eq: T,
    pub max_iter: usize,
    /// Skip the line search and use this constant `M`.
    pub fixed_m: Option<T>,
    pub log_dense: usize,
}

impl<T: Real> ApdagdOptions<T> {
    pub fn new(l0: T, eps_f: T, eps_eq: T) -> Self {
        ApdagdOptions { l0, eps_f, eps_eq, max_iter: 100_000, fixed_m: None, log_dense: usize::MAX }
    }
}

/// Cap on consecutive doublings of `M_k` inside one line search.
pub const MAX_DOUBLINGS: usize = 60;

/// Slack absorbing rounding in the line-search test once `φ` is flat to machine precision.
fn ls_slack<T: Real>(a: T, b: T) -> T {
    T::of(8.0) * T::epsilon() * (a.abs() + b.abs())
}

struct ApdagdState<T> {
    zeta: Vec<T>,
    eta: Vec<T>,
    beta: T,
    x_hat: Vec<T>,
    phi_eta: T,
}

/// Positive root of `Mα² − α − β = 0`.
pub fn apdagd_alpha<T: Real>(m: T, beta: T) -> T {
    (T::one() + (T::one() + T::of(4.0) * m * beta).sqrt()) / (T::of(2.0) * m)
}

/// Largest root of `C + α = 2Lα²`.
pub fn apdsgm_alpha<T: Real>(l: T, c: T) -> T {
    (T::one() + (T::one() + T::of(8.0) * l * c).sqrt()) / (T::of(4.0) * l)
}

/// Adaptive primal-dual accelerated gradient descent.
pub fn apdagd_run<T: Real, P: LinConstrainedProblem<T> + ?Sized>(p: &P, opts: &ApdagdOptions<T>) -> Result<PdRun<T>> {
    apdagd_with_hook(p, opts, |_, _, _, _| false)
}

/// As [`apdagd_run`]; `stop(k, x̂_k, η_k, gap_k)` may end the run early (used by the OT pipeline).
pub fn apdagd_with_hook<T: Real, P: LinConstrainedProblem<T> + ?Sized>(
    p: &P,
    opts: &ApdagdOptions<T>,
    mut stop: impl FnMut(usize, &[T], &[T], T) -> bool,
) -> Result<PdRun<T>> {
    if !(opts.l0 > T::zero()) {
        return Err(Error::InvalidParameter("L0 must be positive".into()));
    }
    let md = p.dual_dim();
    let mut st = ApdagdState {
        zeta: vec![T::zero(); md],
        eta: vec![T::zero(); md],
        beta: T::zero(),
        x_hat: vec![T::zero(); p.primal_dim()],
        phi_eta: T::zero(),
    };
    let mut m_prev = opts.l0;
    let mut trace = Trace::new(&TRACE_COLS);
    let mut calls: u64 = 0;
    let mut inner_total: u64 = 0;
    let mut converged = false;
    let mut k = 0;
    while k < opts.max_iter {
        let mut m = match opts.fixed_m {
            Some(mf) => mf,
            None => m_prev / T::of(2.0),
        };
        let mut doublings = 0usize;
        let (alpha, tau, lam_eval, zeta1, eta1, eta_eval) = loop {
            let alpha = apdagd_alpha(m, st.beta);
            let beta1 = st.beta + alpha;
            let tau = alpha / beta1;
            let lam = linalg::lincomb(tau, &st.zeta, T::one() - tau, &st.eta);
            let le = dual_oracle(p, &lam)?;
            let zeta1 = linalg::lincomb(T::one(), &st.zeta, -alpha, &le.grad);
            let eta1 = linalg::lincomb(tau, &zeta1, T::one() - tau, &st.eta);
            let ee = dual_oracle(p, &eta1)?;
            calls += 2;
            let d = linalg::sub(&eta1, &lam);
            let model = le.phi + linalg::dot(&le.grad, &d) + m / T::of(2.0) * linalg::norm2_sq(&d);
            if opts.fixed_m.is_some() || ee.phi <= model + ls_slack(le.phi, ee.phi) {
                break (alpha, tau, le, zeta1, eta1, ee);
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::Diverged(format!("line search doubled M {MAX_DOUBLINGS} times at k = {k}")));
            }
            m = m * T::of(2.0);
        };
        inner_total += doublings as u64;
        st.beta += alpha;
        st.zeta = zeta1;
        st.eta = eta1;
        st.phi_eta = eta_eval.phi;
        st.x_hat = linalg::lincomb(tau, &lam_eval.x, T::one() - tau, &st.x_hat);
        m_prev = m;
        k += 1;
        let primal = p.objective(&st.x_hat);
        let gap = primal + st.phi_eta;
        let feas = residual(p, &st.x_hat);
        let done = gap <= opts.eps_f && feas <= opts.eps_eq;
        let hook = stop(k, &st.x_hat, &st.eta, gap);
        if is_logged(k, opts.log_dense) || done || hook || k == opts.max_iter {
            trace.push(vec![
                k as f64,
                st.phi_eta.f64(),
                primal.f64(),
                gap.f64(),
                feas.f64(),
                m.f64(),
                inner_total as f64,
                calls as f64,
                linalg::norm2(&st.eta).f64(),
            ]);
        }
        if done || hook {
            converged = true;
            break;
        }
    }
    Ok(PdRun { x_hat: st.x_hat, eta: st.eta, iterations: k, converged, sign_violations: 0, trace })
}

/// Stochastic dual access: `x(λ, ξ)` averaged over a batch.
pub trait StochasticDual<T: Real>: LinConstrainedProblem<T> {
    fn sample_x(&self, lambda: &[T], batch: usize, rng: &mut StreamRng) -> Result<Vec<T>>;
    /// Bound on `E‖A(x(λ, ξ) − x(λ))‖₂²` for a single sample.
    fn sample_variance(&self) -> T;
}

/// Exact problem with additive Gaussian noise on the inner solution.
#[derive(Clone, Debug)]
pub struct NoisyDual<P, T> {
    pub inner: P,
    pub sd: T,
    a_fro2: T,
}

impl<T: Real> NoisyDual<DenseProblem<T>, T> {
    pub fn new(inner: DenseProblem<T>, sd: T) -> Self {
        let a_fro2 = inner.a.frobenius().powi(2);
        NoisyDual { inner, sd, a_fro2 }
    }
}

impl<T: Real> LinConstrainedProblem<T> for NoisyDual<DenseProblem<T>, T> {
    fn primal_dim(&self) -> usize {
        self.inner.primal_dim()
    }
    fn dual_dim(&self) -> usize {
        self.inner.dual_dim()
    }
    fn objective(&self, x: &[T]) -> T {
        self.inner.objective(x)
    }
    fn x_of(&self, lambda: &[T]) -> Result<Vec<T>> {
        self.inner.x_of(lambda)
    }
    fn apply_a(&self, x: &[T]) -> Vec<T> {
        self.inner.apply_a(x)
    }
    fn b(&self) -> &[T] {
        self.inner.b()
    }
    fn gamma(&self) -> T {
        self.inner.gamma()
    }
    fn a_norm(&self) -> T {
        self.inner.a_norm()
    }
}

impl<T: Real> StochasticDual<T> for NoisyDual<DenseProblem<T>, T> {
    fn sample_x(&self, lambda: &[T], batch: usize, r: &mut StreamRng) -> Result<Vec<T>> {
        let mut x = self.inner.x_of(lambda)?;
        if self.sd > T::zero() {
            let s = self.sd / T::of_usize(batch.max(1)).sqrt();
            for v in x.iter_mut() {
                *v += s * T::of(rng::normal(r));
            }
        }
        Ok(x)
    }
    fn sample_variance(&self) -> T {
        self.sd * self.sd * self.a_fro2
    }
}

#[derive(Clone, Debug)]
pub struct ApdsgmOptions<T> {
    pub l: T,
    pub eps: T,
    pub iterations: usize,
    pub seed: u64,
    pub log_dense: usize,
}

/// `M = max{1, ⌈v·C/(Lαε)⌉}`.
pub fn batch_size<T: Real>(v: T, c: T, l: T, alpha: T, eps: T) -> usize {
    if v <= T::zero() {
        return 1;
    }
    let m = (v * c / (l * alpha * eps)).f64();
    if m.is_finite() {
        (m.ceil() as usize).max(1)
    } else {
        usize::MAX / 4
    }
}

/// Accelerated primal-dual stochastic gradient method with the batch rule of the variance condition.
pub fn apdsgm_run<T: Real, P: StochasticDual<T> + ?Sized>(p: &P, opts: &ApdsgmOptions<T>) -> Result<PdRun<T>> {
    if !(opts.l > T::zero()) || !(opts.eps > T::zero()) {
        return Err(Error::InvalidParameter("need L > 0 and eps > 0".into()));
    }
    let md = p.dual_dim();
    let mut zeta = vec![T::zero(); md];
    let mut eta = vec![T::zero(); md];
    let mut x_hat = vec![T::zero(); p.primal_dim()];
    let mut c = T::zero();
    let mut trace = Trace::new(&TRACE_COLS);
    let mut samples: u64 = 0;
    let mut r = rng::stream(opts.seed, 0);
    let v = p.sample_variance();
    for k in 0..opts.iterations {
        let alpha = apdsgm_alpha(opts.l, c);
        c += alpha;
        let tau = alpha / c;
        let m = batch_size(v, c, opts.l, alpha, opts.eps);
        let lam = linalg::lincomb(tau, &zeta, T::one() - tau, &eta);
        let x = p.sample_x(&lam, m, &mut r)?;
        samples += m as u64;
        let g = linalg::sub(p.b(), &p.apply_a(&x));
        linalg::axpy(-alpha, &g, &mut zeta);
        eta = linalg::lincomb(tau, &zeta, T::one() - tau, &eta);
        x_hat = linalg::lincomb(tau, &x, T::one() - tau, &x_hat);
        if !linalg::all_finite(&x_hat) {
            return Err(Error::Diverged("non-finite primal average".into()));
        }
        let kk = k + 1;
        if is_logged(kk, opts.log_dense) || kk == opts.iterations {
            let de = dual_oracle(p, &eta)?;
            let primal = p.objective(&x_hat);
            trace.push(vec![
                kk as f64,
                de.phi.f64(),
                primal.f64(),
                (primal + de.phi).f64(),
                residual(p, &x_hat).f64(),
                m as f64,
                0.0,
                samples as f64,
                linalg::norm2(&eta).f64(),
            ]);
        }
    }
    Ok(PdRun { x_hat, eta, iterations: opts.iterations, converged: true, sign_violations: 0, trace })
}

#[derive(Clone, Debug)]
pub struct PdugdsdrOptions<T> {
    pub eps_f: T,
    pub eps_eq: T,
    /// Slack `ε` in the step-size equation.
    pub slack: T,
    pub max_iter: usize,
    pub log_dense: usize,
}

/// Argument tolerance of the one-dimensional searches.
pub const LINE_TOL: f64 = 1e-12;
/// Step cap of the one-dimensional searches.
pub const LINE_CAP: usize = 80;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section<T: Real>(mut f: impl FnMut(T) -> Result<T>, lo: T, hi: T, tol: T) -> Result<T> {
    let g = T::of(INV_PHI);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut steps = 0;
    while (b - a) > tol && steps < LINE_CAP {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
        steps += 1;
    }
    // Compare the interior estimate with the endpoints so boundary minima are found exactly.
    let mid = (a + b) / T::of(2.0);
    let mut best = (mid, f(mid)?);
    for t in [lo, hi] {
        let ft = f(t)?;
        if ft < best.1 {
            best = (t, ft);
        }
    }
    Ok(best.0)
}

/// Minimizer on `[0, hi]` of a convex function given its derivative, by bisection on the sign.
///
/// Returns a point where the derivative is `≤ 0` (or `0` when it is already nonnegative there),
/// so that the step-4 sign condition holds exactly.
pub fn segment_argmin<T: Real>(mut deriv: impl FnMut(T) -> Result<T>, hi: T, tol: T) -> Result<T> {
    if deriv(T::zero())? >= T::zero() {
        return Ok(T::zero());
    }
    if deriv(hi)? <= T::zero() {
        return Ok(hi);
    }
    let (mut a, mut b) = (T::zero(), hi);
    let mut steps = 0;
    while b - a > tol * hi.max(T::one()) && steps < LINE_CAP {
        let m = (a + b) / T::of(2.0);
        if deriv(m)? <= T::zero() {
            a = m;
        } else {
            b = m;
        }
        steps += 1;
    }
    Ok(a)
}

/// Minimizer on `[0, ∞)`: doubles `h0` until the derivative turns nonnegative, then bisects.
pub fn ray_argmin<T: Real>(mut deriv: impl FnMut(T) -> Result<T>, h0: T, tol: T) -> Result<T> {
    let mut hi = h0;
    let mut steps = 0;
    while deriv(hi)? < T::zero() {
        hi = hi * T::of(2.0);
        steps += 1;
        if steps > LINE_CAP {
            return Err(Error::LineSearch("no bracket along the ray".into()));
        }
    }
    segment_argmin(deriv, hi, tol)
}

/// Positive root of `a²‖g‖² − a(ε + 2Δ) − 2A_kΔ = 0`.
pub fn pdugdsdr_step<T: Real>(g2: T, eps: T, delta: T, a_k: T) -> T {
    let bq = eps + T::of(2.0) * delta;
    (bq + (bq * bq + T::of(8.0) * g2 * a_k * delta).sqrt()) / (T::of(2.0) * g2)
}

/// Primal-dual universal gradient method with exact one-dimensional searches.
///
/// Takes no smoothness constant; the step sizes come from the searches alone.
pub fn pdugdsdr_run<T: Real, P: LinConstrainedProblem<T> + ?Sized>(p: &P, opts: &PdugdsdrOptions<T>) -> Result<PdRun<T>> {
    let md = p.dual_dim();
    let mut zeta = vec![T::zero(); md];
    let mut eta = vec![T::zero(); md];
    let mut x_hat = vec![T::zero(); p.primal_dim()];
    let mut a_sum = T::zero();
    let mut trace = Trace::new(&TRACE_COLS);
    let calls = std::cell::Cell::new(0u64);
    let phi = |l: &[T]| -> Result<T> {
        calls.set(calls.get() + 1);
        Ok(dual_oracle(p, l)?.phi)
    };
    let tol = T::of(LINE_TOL);
    let mut sign_violations = 0usize;
    let mut converged = false;
    let mut k = 0;
    while k < opts.max_iter {
        let dir = linalg::sub(&eta, &zeta);
        let slope_dir = |b: T| -> Result<T> {
            calls.set(calls.get() + 1);
            Ok(linalg::dot(&dual_oracle(p, &linalg::lincomb(T::one(), &zeta, b, &dir))?.grad, &dir))
        };
        let beta = if linalg::norm2_sq(&dir) == T::zero() {
            T::zero()
        } else {
            segment_argmin(slope_dir, T::one(), tol)?
        };
        let lam = linalg::lincomb(T::one(), &zeta, beta, &dir);
        let le = dual_oracle(p, &lam)?;
        calls.set(calls.get() + 1);
        let g = le.grad.clone();
        let g2 = linalg::norm2_sq(&g);
        let inner = linalg::dot(&g, &linalg::sub(&zeta, &lam));
        if inner < T::zero() {
            sign_violations += 1;
        }
        if g2 == T::zero() {
            // λ is a dual solution and x(λ) is primal optimal.
            x_hat = le.x;
            eta = lam;
            k += 1;
            let primal = p.objective(&x_hat);
            trace.push(vec![k as f64, le.phi.f64(), primal.f64(), (primal + le.phi).f64(), residual(p, &x_hat).f64(), a_sum.f64(), 0.0, calls.get() as f64, linalg::norm2(&eta).f64()]);
            converged = true;
            break;
        }
        let slope_ray = |h: T| -> Result<T> {
            calls.set(calls.get() + 1);
            Ok(-linalg::dot(&dual_oracle(p, &linalg::lincomb(T::one(), &lam, -h, &g))?.grad, &g))
        };
        let h = ray_argmin(slope_ray, T::one() / g2.sqrt(), tol)?;
        let eta1 = linalg::lincomb(T::one(), &lam, -h, &g);
        let phi_eta = phi(&eta1)?;
        let delta = (le.phi - phi_eta).max(T::zero());
        let a = pdugdsdr_step(g2, opts.slack, delta, a_sum);
        if !a.is_finite() {
            return Err(Error::LineSearch(format!("non-finite step at k = {k}")));
        }
        if a == T::zero() {
            // No decrease along the ray and no slack: φ is flat to machine precision.
            trace.note(format!("stalled at k = {k}"));
            break;
        }
        linalg::axpy(-a, &g, &mut zeta);
        x_hat = linalg::lincomb(a / (a_sum + a), &le.x, a_sum / (a_sum + a), &x_hat);
        a_sum += a;
        eta = eta1;
        k += 1;
        let primal = p.objective(&x_hat);
        let gap = primal + phi_eta;
        let feas = residual(p, &x_hat);
        let done = gap.abs() <= opts.eps_f && feas <= opts.eps_eq;
        if is_logged(k, opts.log_dense) || done || k == opts.max_iter {
            trace.push(vec![k as f64, phi_eta.f64(), primal.f64(), gap.f64(), feas.f64(), a_sum.f64(), 0.0, calls.get() as f64, linalg::norm2(&eta).f64()]);
        }
        if done {
            converged = true;
            break;
        }
    }
    if sign_violations > 0 {
        trace.note(format!("sign condition violated at {sign_violations} iterations"));
    }
    Ok(PdRun { x_hat, eta, iterations: k, converged, sign_violations, trace })
}
