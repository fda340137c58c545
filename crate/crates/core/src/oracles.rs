//! Inexact first-order, stochastic, zero-order and directional-derivative oracles.
//!
//! Every random draw comes from [`rng::stream`] keyed by the oracle seed and its
//! query counter, so equal seeds reproduce identical answers.

use crate::linalg::{self, Mat};
use crate::prox::{dual_norm, NormTag};
use crate::rng::{self, StreamRng};
use crate::scalar::Real;
use rand::Rng;
use std::sync::Arc;

/// Truncation level (in standard deviations) of the Gaussian noise injectors.
pub const TRUNCATION: f64 = 6.0;

/// Smooth test function with known optimum data.
pub trait SmoothFn<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T]) -> T;
    fn grad(&self, x: &[T]) -> Vec<T>;
    /// Lipschitz constant of the gradient in the ℓ2 norm.
    fn lipschitz(&self) -> T;
    fn minimizer(&self) -> Option<Vec<T>> {
        None
    }
    fn min_value(&self) -> Option<T> {
        None
    }
}

/// `f(x) = ½ (x − x*)ᵀ H (x − x*) + f*` with `H` symmetric positive semidefinite.
#[derive(Clone, Debug)]
pub struct Quadratic<T> {
    pub h: Mat<T>,
    pub xstar: Vec<T>,
    pub fstar: T,
    l: T,
    mu: T,
}

impl<T: Real> Quadratic<T> {
    pub fn new(h: Mat<T>, xstar: Vec<T>, fstar: T) -> Self {
        let ev = h.sym_eigenvalues();
        let l = *ev.last().unwrap_or(&T::zero());
        let mu = ev.first().copied().unwrap_or(T::zero()).max(T::zero());
        Quadratic { h, xstar, fstar, l, mu }
    }

    /// `½ s ‖x − x*‖²`.
    pub fn isotropic(n: usize, s: T, xstar: Vec<T>) -> Self {
        Self::new(Mat::identity(n).scaled(s), xstar, T::zero())
    }

    /// Diagonal quadratic with the given eigenvalues.
    pub fn diagonal(d: &[T], xstar: Vec<T>) -> Self {
        Self::new(Mat::diag(d), xstar, T::zero())
    }

    pub fn strong_convexity(&self) -> T {
        self.mu
    }
}

impl<T: Real> SmoothFn<T> for Quadratic<T> {
    fn dim(&self) -> usize {
        self.xstar.len()
    }
    fn value(&self, x: &[T]) -> T {
        let d = linalg::sub(x, &self.xstar);
        T::of(0.5) * linalg::dot(&d, &self.h.matvec(&d)) + self.fstar
    }
    fn grad(&self, x: &[T]) -> Vec<T> {
        self.h.matvec(&linalg::sub(x, &self.xstar))
    }
    fn lipschitz(&self) -> T {
        self.l
    }
    fn minimizer(&self) -> Option<Vec<T>> {
        Some(self.xstar.clone())
    }
    fn min_value(&self) -> Option<T> {
        Some(self.fstar)
    }
}

/// `f(x) = γ ln Σᵢ exp((aᵢᵀx + bᵢ)/γ)`.
#[derive(Clone, Debug)]
pub struct LogSumExp<T> {
    pub a: Mat<T>,
    pub b: Vec<T>,
    pub gamma: T,
    l: T,
}

impl<T: Real> LogSumExp<T> {
    pub fn new(a: Mat<T>, b: Vec<T>, gamma: T) -> Self {
        let na = a.op_norm2();
        LogSumExp { l: na * na / gamma, a, b, gamma }
    }

    fn logits(&self, x: &[T]) -> Vec<T> {
        let ax = self.a.matvec(x);
        ax.iter().zip(&self.b).map(|(&u, &v)| (u + v) / self.gamma).collect()
    }
}

impl<T: Real> SmoothFn<T> for LogSumExp<T> {
    fn dim(&self) -> usize {
        self.a.cols
    }
    fn value(&self, x: &[T]) -> T {
        self.gamma * linalg::logsumexp(&self.logits(x))
    }
    fn grad(&self, x: &[T]) -> Vec<T> {
        self.a.tmatvec(&linalg::softmax(&self.logits(x)))
    }
    fn lipschitz(&self) -> T {
        self.l
    }
}

/// Two-sided truncated standard normal draw.
pub fn truncated_normal<T: Real>(r: &mut StreamRng) -> T {
    T::of(rng::normal(r).clamp(-TRUNCATION, TRUNCATION))
}

/// Uniform draw on the ℓ2 unit sphere in ℝⁿ.
pub fn sample_sphere<T: Real, R: Rng + ?Sized>(r: &mut R, n: usize) -> Vec<T> {
    assert!(n >= 1, "sphere dimension must be positive");
    loop {
        let g: Vec<T> = (0..n).map(|_| T::of(rng::normal(r))).collect();
        let ng = linalg::norm2(&g);
        if ng > T::zero() && ng.is_finite() {
            return g.into_iter().map(|v| v / ng).collect();
        }
    }
}

/// Noise vector with `E‖ν‖∗² ≤ 1` in the dual norm of `norm`.
fn unit_noise<T: Real>(r: &mut StreamRng, n: usize, norm: NormTag) -> Vec<T> {
    match norm {
        // ℓ2: Var of each truncated coordinate ≤ 1, scaled by 1/√n.
        NormTag::L2 => {
            let s = T::one() / T::of_usize(n).sqrt();
            (0..n).map(|_| truncated_normal::<T>(r) * s).collect()
        }
        // ℓ∞ dual: every coordinate bounded by 1.
        NormTag::L1 => (0..n).map(|_| truncated_normal::<T>(r) / T::of(TRUNCATION)).collect(),
    }
}

/// Shape of the bounded noise `η` of the directional-derivative oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaModel {
    /// Uniform on `[−Δη, Δη]`.
    Uniform,
    /// Constant `+Δη`.
    Constant,
}

/// `(δ, L)`-oracle built from an exact function.
///
/// The value is shifted down by `δ·s`, `s ∈ [0, ½]`. With `diameter = Some(D)` the
/// gradient is also perturbed by a vector of dual norm at most `δ/(2D)`, which
/// keeps the envelope valid for pairs at distance at most `D`.
pub struct DeltaLOracle<T> {
    pub f: Arc<dyn SmoothFn<T>>,
    pub delta: T,
    pub l: T,
    pub norm: NormTag,
    pub diameter: Option<T>,
    pub seed: u64,
    calls: u64,
}

impl<T: Real> DeltaLOracle<T> {
    pub fn new(f: Arc<dyn SmoothFn<T>>, delta: T, norm: NormTag, seed: u64) -> Self {
        let l = f.lipschitz();
        DeltaLOracle { f, delta, l, norm, diameter: None, seed, calls: 0 }
    }

    pub fn exact(f: Arc<dyn SmoothFn<T>>) -> Self {
        Self::new(f, T::zero(), NormTag::L2, 0)
    }

    pub fn with_gradient_error(mut self, diameter: T) -> Self {
        self.diameter = Some(diameter);
        self
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn eval(&mut self, x: &[T]) -> (T, Vec<T>) {
        let q = self.calls;
        self.calls += 1;
        let fx = self.f.value(x);
        let mut g = self.f.grad(x);
        if self.delta == T::zero() {
            return (fx, g);
        }
        let mut r = rng::stream(self.seed, q);
        let s = T::of(0.5 * rng::uniform(&mut r));
        if let Some(d) = self.diameter {
            let nu = unit_noise::<T>(&mut r, g.len(), NormTag::L1);
            // ‖ν‖∞ ≤ 1, and the dual norm of ℓ2 dominates, so rescale by the actual dual norm.
            let dn = dual_norm(self.norm, &nu);
            if dn > T::zero() {
                let c = self.delta / (T::of(2.0) * d * dn) * T::of(rng::uniform(&mut r));
                linalg::axpy(c, &nu, &mut g);
            }
        }
        (fx - self.delta * s, g)
    }
}

/// Stochastic `(δ, L)`-oracle: `G = g_{δ,L} + σν` with `E ν = 0` and `E‖ν‖∗² ≤ 1`.
pub struct StochasticDeltaLOracle<T> {
    pub base: DeltaLOracle<T>,
    pub sigma: T,
    pub seed: u64,
    calls: u64,
}

impl<T: Real> StochasticDeltaLOracle<T> {
    pub fn new(base: DeltaLOracle<T>, sigma: T, seed: u64) -> Self {
        StochasticDeltaLOracle { base, sigma, seed, calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn sample(&mut self, x: &[T]) -> (T, Vec<T>) {
        let q = self.calls;
        self.calls += 1;
        let (f, mut g) = self.base.eval(x);
        if self.sigma == T::zero() {
            return (f, g);
        }
        let mut r = rng::stream(self.seed ^ 0x5157_4f43, q);
        let nu = unit_noise::<T>(&mut r, g.len(), self.base.norm);
        linalg::axpy(self.sigma, &nu, &mut g);
        let fz = f + self.sigma * truncated_normal::<T>(&mut r);
        (fz, g)
    }

    /// Mini-batch average of `m` independent samples.
    pub fn sample_batch(&mut self, x: &[T], m: usize) -> (T, Vec<T>) {
        let m = m.max(1);
        let (mut f, mut g) = self.sample(x);
        for _ in 1..m {
            let (fi, gi) = self.sample(x);
            f += fi;
            linalg::axpy(T::one(), &gi, &mut g);
        }
        let s = T::one() / T::of_usize(m);
        (f * s, linalg::scale(s, &g))
    }
}

/// Zero-order oracle `f̃(x, δ) = f(x) + δu`, `u` uniform on `[−1, 1]`.
pub struct ZeroOrderOracle<T> {
    pub f: Arc<dyn Fn(&[T]) -> T + Send + Sync>,
    pub delta: T,
    pub seed: u64,
    calls: u64,
}

impl<T: Real> ZeroOrderOracle<T> {
    pub fn new(f: Arc<dyn Fn(&[T]) -> T + Send + Sync>, delta: T, seed: u64) -> Self {
        ZeroOrderOracle { f, delta, seed, calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn eval(&mut self, x: &[T]) -> T {
        let q = self.calls;
        self.calls += 1;
        let fx = (self.f)(x);
        if self.delta == T::zero() {
            return fx;
        }
        let mut r = rng::stream(self.seed, q);
        fx + self.delta * T::of(2.0 * rng::uniform(&mut r) - 1.0)
    }
}

/// Biased gradient-free estimate `(m/τ)(f̃(x + τe, δ) − f̃(x, δ)) e`.
pub fn gradient_free_estimate<T: Real>(oracle: &mut ZeroOrderOracle<T>, x: &[T], tau: T, e: &[T], m_dim: usize) -> Vec<T> {
    let xp: Vec<T> = x.iter().zip(e).map(|(&a, &b)| a + tau * b).collect();
    let fp = oracle.eval(&xp);
    let f0 = oracle.eval(x);
    let c = T::of_usize(m_dim) / tau * (fp - f0);
    linalg::scale(c, e)
}

/// Noisy directional-derivative oracle `⟨g(x, ξ), e⟩ + ζ + η`.
///
/// `g(x, ξ) = ∇f(x) + σν` with `E‖ν‖₂² ≤ 1`, `ζ` truncated Gaussian with `E ζ² ≤ Δζ`,
/// and `|η| ≤ Δη`.
pub struct DirDerivOracle<T> {
    pub f: Arc<dyn SmoothFn<T>>,
    pub delta_zeta: T,
    pub delta_eta: T,
    pub sigma: T,
    pub l2: T,
    pub eta_model: EtaModel,
    pub seed: u64,
    calls: u64,
}

impl<T: Real> DirDerivOracle<T> {
    pub fn new(f: Arc<dyn SmoothFn<T>>, sigma: T, delta_zeta: T, delta_eta: T, seed: u64) -> Self {
        let l2 = f.lipschitz();
        DirDerivOracle { f, delta_zeta, delta_eta, sigma, l2, eta_model: EtaModel::Uniform, seed, calls: 0 }
    }

    pub fn noiseless(f: Arc<dyn SmoothFn<T>>) -> Self {
        Self::new(f, T::zero(), T::zero(), T::zero(), 0)
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// Returns the noisy derivative together with the `(ζ, η)` draws, for tests.
    pub fn query_parts(&mut self, x: &[T], e: &[T]) -> (T, T, T) {
        let q = self.calls;
        self.calls += 1;
        let mut g = self.f.grad(x);
        let mut r = rng::stream(self.seed, q);
        if self.sigma > T::zero() {
            let nu = unit_noise::<T>(&mut r, g.len(), NormTag::L2);
            linalg::axpy(self.sigma, &nu, &mut g);
        }
        let zeta = if self.delta_zeta > T::zero() { self.delta_zeta.sqrt() * truncated_normal::<T>(&mut r) } else { T::zero() };
        let eta = match self.eta_model {
            EtaModel::Uniform => self.delta_eta * T::of(2.0 * rng::uniform(&mut r) - 1.0),
            EtaModel::Constant => self.delta_eta,
        };
        (linalg::dot(&g, e) + zeta + eta, zeta, eta)
    }

    pub fn query(&mut self, x: &[T], e: &[T]) -> T {
        self.query_parts(x, e).0
    }
}

/// `(1/m) Σᵢ f̃'(x, ξᵢ, e) · e`.
pub fn minibatch_dirderiv_grad<T: Real>(oracle: &mut DirDerivOracle<T>, x: &[T], e: &[T], m: usize) -> Vec<T> {
    let m = m.max(1);
    let mut s = T::zero();
    for _ in 0..m {
        s += oracle.query(x, e);
    }
    linalg::scale(s / T::of_usize(m), e)
}
