//! Stochastic Intermediate Gradient Method and its restart variants for strongly convex problems.

use crate::error::{Error, Result};
use crate::linalg;
use crate::oracles::StochasticDeltaLOracle;
use crate::prox::{Composite, FeasibleSet, ProxKind, ProxSetup};
use crate::scalar::Real;
use crate::trace::{is_logged, Trace};

pub const C1: f64 = 5.656_854_249_492_381; // 4√2
pub const C2: f64 = 22.627_416_997_969_522; // 16√2
pub const C3: f64 = 48.0;
pub const C4: f64 = 6.928_203_230_275_509; // 4√3

/// Coefficient sequences α, β, B for a given `p ∈ [1, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmSchedule<T> {
    pub p: T,
    pub a: T,
    pub b: T,
    pub l: T,
    pub sigma: T,
    pub r: T,
}

impl<T: Real> SigmSchedule<T> {
    pub fn new(p: T, l: T, sigma: T, r: T) -> Result<Self> {
        if !(p >= T::one() && p <= T::of(2.0)) {
            return Err(Error::InvalidParameter(format!("p must lie in [1, 2], got {p}")));
        }
        if !(l > T::zero()) || !(r > T::zero()) || sigma < T::zero() {
            return Err(Error::InvalidParameter("need L > 0, R > 0, sigma >= 0".into()));
        }
        let two = T::of(2.0);
        let a = two.powf((two * p - T::one()) / two);
        let b = two.powf((T::of(5.0) - two * p) / T::of(4.0)) * p.powf((T::one() - two * p) / two);
        Ok(SigmSchedule { p, a, b, l, sigma, r })
    }

    pub fn alpha(&self, i: usize) -> T {
        let p = self.p;
        ((T::of_usize(i) + p) / p).powf(p - T::one()) / self.a
    }

    pub fn beta(&self, i: usize) -> T {
        let p = self.p;
        let e = (T::of(2.0) * p - T::one()) / T::of(2.0);
        self.l + self.b * self.sigma / self.r * (T::of_usize(i) + p + T::one()).powf(e)
    }

    pub fn big_b(&self, i: usize) -> T {
        let al = self.alpha(i);
        self.a * al * al
    }

    /// `A_k = Σ_{i ≤ k} α_i`.
    pub fn big_a(&self, k: usize) -> T {
        (0..=k).map(|i| self.alpha(i)).sum()
    }

    pub fn tau(&self, i: usize) -> T {
        self.alpha(i + 1) / self.big_b(i + 1)
    }
}

/// `C₁LR²/k^p + C₂σR/√k + C₃k^{p−1}δ`.
pub fn theorem_bound(k: usize, p: f64, l: f64, r: f64, sigma: f64, delta: f64) -> f64 {
    let k = k as f64;
    C1 * l * r * r / k.powf(p) + C2 * sigma * r / k.sqrt() + C3 * k.powf(p - 1.0) * delta
}

/// Un-simplified right-hand side of the same bound.
pub fn theorem_bound_exact(k: usize, p: f64, l: f64, r: f64, sigma: f64, delta: f64) -> f64 {
    let kp = k as f64 + p;
    l * r * r * p.powf(p) * 2f64.powf((2.0 * p - 3.0) / 2.0) / kp.powf(p)
        + sigma * r * 2f64.powf((3.0 + 2.0 * p) / 4.0) * p.sqrt() * (kp + 2.0).powf(p - 0.5) / kp.powf(p)
        + 2f64.powf(2.0 * p - 1.0) * ((kp / p).powf(p - 1.0) + 1.0) * delta
}

#[derive(Clone, Debug)]
pub struct SigmOptions<T> {
    pub iterations: usize,
    /// Oracle samples averaged per gradient request.
    pub batch: usize,
    /// Optimal value of `f + h`, for the gap column.
    pub phi_star: Option<T>,
    pub log_dense: usize,
}

impl<T> SigmOptions<T> {
    pub fn new(iterations: usize) -> Self {
        SigmOptions { iterations, batch: 1, phi_star: None, log_dense: usize::MAX }
    }
}

#[derive(Clone, Debug)]
pub struct SigmRun<T> {
    pub y: Vec<T>,
    pub x: Vec<T>,
    pub z: Vec<T>,
    /// Columns `k, gap, oracle_calls, stage`.
    pub trace: Trace,
}

fn check_finite<T: Real>(g: &[T], what: &str) -> Result<()> {
    if linalg::all_finite(g) {
        Ok(())
    } else {
        Err(Error::Diverged(format!("non-finite {what}")))
    }
}

/// One SIGM run. The prox-center of `setup` is the starting point `x₀`.
pub fn sigm_run<T: Real>(
    oracle: &mut StochasticDeltaLOracle<T>,
    h: Composite<T>,
    q: &FeasibleSet<T>,
    setup: &ProxSetup<T>,
    sched: &SigmSchedule<T>,
    opts: &SigmOptions<T>,
) -> Result<SigmRun<T>> {
    let mut trace = Trace::new(&["k", "gap", "oracle_calls", "stage"]);
    sigm_core(oracle, h, q, setup, sched, opts, 0, &mut trace)
}

#[allow(clippy::too_many_arguments)]
fn sigm_core<T: Real>(
    oracle: &mut StochasticDeltaLOracle<T>,
    h: Composite<T>,
    q: &FeasibleSet<T>,
    setup: &ProxSetup<T>,
    sched: &SigmSchedule<T>,
    opts: &SigmOptions<T>,
    stage: usize,
    trace: &mut Trace,
) -> Result<SigmRun<T>> {
    let f = oracle.base.f.clone();
    let calls0 = oracle.calls();
    let x0 = setup.center.clone();
    let phi = |y: &[T]| f.value(y) + h.value(y);
    let mut log = |k: usize, y: &[T], calls: u64| {
        if is_logged(k, opts.log_dense) {
            let gap = opts.phi_star.map(|s| (phi(y) - s).f64()).unwrap_or(f64::NAN);
            trace.push(vec![k as f64, gap, (calls - calls0) as f64, stage as f64]);
        }
    };

    let (_, g0) = oracle.sample_batch(&x0, opts.batch);
    check_finite(&g0, "oracle gradient")?;
    let al0 = sched.alpha(0);
    let mut y = setup.mirror_step_composite(&x0, &linalg::scale(al0, &g0), sched.beta(0), al0, h, q)?;
    let mut s = linalg::scale(al0, &g0);
    let mut a_sum = al0;
    let mut z = x0.clone();
    let mut x = x0.clone();
    log(0, &y, oracle.calls());

    for k in 0..opts.iterations {
        let bk = sched.beta(k);
        z = setup.mirror_step_composite(&x0, &s, bk, a_sum, h, q)?;
        let al1 = sched.alpha(k + 1);
        let b1 = sched.big_b(k + 1);
        let tau = al1 / b1;
        x = linalg::lincomb(tau, &z, T::one() - tau, &y);
        let (_, g) = oracle.sample_batch(&x, opts.batch);
        check_finite(&g, "oracle gradient")?;
        let xh = setup.mirror_step_composite(&z, &linalg::scale(al1, &g), bk, al1, h, q)?;
        let w = linalg::lincomb(tau, &xh, T::one() - tau, &y);
        linalg::axpy(al1, &g, &mut s);
        a_sum += al1;
        y = linalg::lincomb((a_sum - b1) / a_sum, &y, b1 / a_sum, &w);
        check_finite(&y, "iterate")?;
        log(k + 1, &y, oracle.calls());
    }
    Ok(SigmRun { y, x, z, trace: std::mem::take(trace) })
}

/// Settings shared by the two restart schemes.
#[derive(Clone, Debug)]
pub struct RestartConfig<T> {
    pub mu: T,
    pub r0: T,
    /// Growth constant `V` of the prox-function.
    pub v: T,
    /// Oracle bias `δ`.
    pub delta: T,
    pub p: T,
    pub l: T,
    pub sigma: T,
    /// Confidence level `Λ` (second scheme only).
    pub lambda: T,
    /// Target accuracy, used only to check the admissible `δ`.
    pub eps: Option<T>,
    pub x_star: Option<Vec<T>>,
}

/// Per-stage sizes of the restart schemes.
#[derive(Clone, Debug, PartialEq)]
pub struct StagePlan {
    pub n_k: usize,
    pub m_k: usize,
    pub r_k: f64,
}

fn ceil_usize(v: f64) -> usize {
    if v <= 0.0 {
        0
    } else {
        v.ceil().min(usize::MAX as f64 / 2.0) as usize
    }
}

impl<T: Real> RestartConfig<T> {
    fn growth(&self, c: f64) -> f64 {
        c * std::f64::consts::E * C1 * self.l.f64() * self.v.f64().powi(2) / self.mu.f64()
    }

    fn r_k(&self, k: usize, c: f64) -> f64 {
        let e = std::f64::consts::E;
        let p = self.p.f64();
        let ek = (-(k as f64)).exp();
        let r2 = self.r0.f64().powi(2) * ek
            + 2f64.powf(p) * e * C3 * self.delta.f64() / (self.mu.f64() * (e - 1.0)) * self.growth(c).powf((p - 1.0) / p) * (1.0 - ek);
        r2.sqrt()
    }

    /// Stage `k` of the expectation scheme.
    pub fn plan(&self, k: usize) -> StagePlan {
        let e = std::f64::consts::E;
        let p = self.p.f64();
        let n_k = ceil_usize(self.growth(4.0).powf(1.0 / p)).max(1);
        let m = 16.0 * e.powi(k as i32 + 2) * C2 * C2 * self.sigma.f64().powi(2) * self.v.f64().powi(2)
            / (self.mu.f64().powi(2) * self.r0.f64().powi(2) * n_k as f64);
        StagePlan { n_k, m_k: ceil_usize(m).max(1), r_k: self.r_k(k, 4.0) }
    }

    /// Stage `k` of the confidence scheme with `outer` stages.
    pub fn plan_confidence(&self, k: usize, outer: usize) -> StagePlan {
        let e = std::f64::consts::E;
        let p = self.p.f64();
        let n_k = ceil_usize(self.growth(6.0).powf(1.0 / p)).max(1);
        let lg = (3.0 * outer as f64 / self.lambda.f64()).ln();
        let base = e.powi(k as i32 + 2) * self.sigma.f64().powi(2) / (self.mu.f64().powi(2) * self.r0.f64().powi(2) * n_k as f64);
        let m1 = 36.0 * base * C2 * C2 * self.v.f64().powi(2) * (1.0 + lg).powi(2);
        let m2 = 144.0 * base * C4 * C4 * lg;
        StagePlan { n_k, m_k: ceil_usize(m1).max(ceil_usize(m2)).max(1), r_k: self.r_k(k, 6.0) }
    }

    /// Largest admissible `δ` for accuracy `eps`.
    pub fn admissible_delta(&self, eps: f64, c: f64) -> f64 {
        let e = std::f64::consts::E;
        let p = self.p.f64();
        eps * (e - 1.0) / (2f64.powf(p) * C3 * e) * self.growth(c).powf((1.0 - p) / p)
    }

    /// `R₀²e^{−k} + 2^p e C₃ δ/(μ(e−1))·(4eC₁LV²/μ)^{(p−1)/p}`.
    pub fn distance_bound(&self, k: usize) -> f64 {
        let e = std::f64::consts::E;
        let p = self.p.f64();
        self.r0.f64().powi(2) * (-(k as f64)).exp()
            + 2f64.powf(p) * e * C3 * self.delta.f64() / (self.mu.f64() * (e - 1.0)) * self.growth(4.0).powf((p - 1.0) / p)
    }

    /// Total oracle-call budget for accuracy `eps`.
    pub fn call_budget(&self, eps: f64) -> f64 {
        let e = std::f64::consts::E;
        let p = self.p.f64();
        let lnr = (self.mu.f64() * self.r0.f64().powi(2) / eps).ln();
        (1.0 + self.growth(4.0).powf(1.0 / p)) * (1.0 + lnr)
            + 16.0 * e.powi(3) * C2 * C2 * self.sigma.f64().powi(2) * self.v.f64().powi(2) / (self.mu.f64() * eps * (e - 1.0))
    }
}

#[derive(Clone, Debug)]
pub struct RestartRun<T> {
    pub u: Vec<T>,
    /// `u_0, …, u_K`.
    pub stages: Vec<Vec<T>>,
    pub plans: Vec<StagePlan>,
    /// Columns `k, gap, oracle_calls, stage`; stage rows carry the last inner `k`.
    pub trace: Trace,
}

fn restart_setup<T: Real>(setup: &ProxSetup<T>, u: &[T]) -> Result<ProxSetup<T>> {
    if setup.kind == ProxKind::EntropySimplex {
        return Err(Error::Unsupported("restart needs a homogeneous prox-function".into()));
    }
    setup.clone().with_center(u.to_vec())
}

fn restart_loop<T: Real>(
    oracle: &mut StochasticDeltaLOracle<T>,
    h: Composite<T>,
    q: &FeasibleSet<T>,
    setup: &ProxSetup<T>,
    cfg: &RestartConfig<T>,
    u0: &[T],
    outer: usize,
    phi_star: Option<T>,
    plan: impl Fn(usize) -> StagePlan,
    ball: bool,
) -> Result<RestartRun<T>> {
    if !(cfg.mu > T::zero()) || !(cfg.r0 > T::zero()) {
        return Err(Error::InvalidParameter("need mu > 0 and R0 > 0".into()));
    }
    let mut trace = Trace::new(&["k", "gap", "oracle_calls", "stage"]);
    let mut u = u0.to_vec();
    let mut stages = vec![u.clone()];
    let mut plans = Vec::new();
    let f = oracle.base.f.clone();
    let calls0 = oracle.calls();
    if let Some(eps) = cfg.eps {
        let c = if ball { 6.0 } else { 4.0 };
        let adm = cfg.admissible_delta(eps.f64(), c);
        if cfg.delta.f64() > adm {
            trace.note(format!("oracle bias {} exceeds the admissible {adm:e} for eps {eps}", cfg.delta));
        }
    }
    let row = |trace: &mut Trace, k: usize, u: &[T], calls: u64, stage: usize| {
        let gap = phi_star.map(|s| (f.value(u) + h.value(u) - s).f64()).unwrap_or(f64::NAN);
        trace.push(vec![k as f64, gap, (calls - calls0) as f64, stage as f64]);
    };
    row(&mut trace, 0, &u, oracle.calls(), 0);
    for k in 0..outer {
        let pl = plan(k);
        let st = restart_setup(setup, &u)?;
        let rk = T::of(pl.r_k);
        let qk = if ball {
            match q {
                FeasibleSet::Full => FeasibleSet::Ball { center: u.clone(), radius: rk },
                _ => return Err(Error::Unsupported("confidence restart needs Q = full space".into())),
            }
        } else {
            q.clone()
        };
        let sigma_k = cfg.sigma / T::of_usize(pl.m_k).sqrt();
        let sched = SigmSchedule::new(cfg.p, cfg.l, sigma_k, cfg.v * rk)?;
        let opts = SigmOptions { iterations: pl.n_k, batch: pl.m_k, phi_star: None, log_dense: 0 };
        let mut inner = Trace::new(&["k", "gap", "oracle_calls", "stage"]);
        let run = sigm_core(oracle, h, &qk, &st, &sched, &opts, k, &mut inner)?;
        u = run.y;
        row(&mut trace, pl.n_k, &u, oracle.calls(), k + 1);
        stages.push(u.clone());
        plans.push(pl);
    }
    Ok(RestartRun { u, stages, plans, trace })
}

/// Restart scheme bounding `E φ(u_k) − φ*` and `E‖u_k − x*‖²`.
#[allow(clippy::too_many_arguments)]
pub fn sigm_restart_run<T: Real>(
    oracle: &mut StochasticDeltaLOracle<T>,
    h: Composite<T>,
    q: &FeasibleSet<T>,
    setup: &ProxSetup<T>,
    cfg: &RestartConfig<T>,
    u0: &[T],
    outer: usize,
    phi_star: Option<T>,
) -> Result<RestartRun<T>> {
    restart_loop(oracle, h, q, setup, cfg, u0, outer, phi_star, |k| cfg.plan(k), false)
}

/// Restart scheme with balls `Q_k` and confidence-dependent batches.
#[allow(clippy::too_many_arguments)]
pub fn sigm_restart_confidence_run<T: Real>(
    oracle: &mut StochasticDeltaLOracle<T>,
    h: Composite<T>,
    setup: &ProxSetup<T>,
    cfg: &RestartConfig<T>,
    u0: &[T],
    outer: usize,
    phi_star: Option<T>,
) -> Result<RestartRun<T>> {
    restart_loop(oracle, h, &FeasibleSet::Full, setup, cfg, u0, outer, phi_star, |k| cfg.plan_confidence(k, outer), true)
}

/// `μR₀²/2·e^{−N} + 2^{p−1}eC₃/(e−1)·(6eC₁LV²/μ)^{(p−1)/p}·δ`.
pub fn confidence_bound<T: Real>(cfg: &RestartConfig<T>, outer: usize) -> f64 {
    let e = std::f64::consts::E;
    let p = cfg.p.f64();
    cfg.mu.f64() * cfg.r0.f64().powi(2) / 2.0 * (-(outer as f64)).exp()
        + 2f64.powf(p - 1.0) * e * C3 / (e - 1.0) * cfg.growth(6.0).powf((p - 1.0) / p) * cfg.delta.f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((C1 - 4.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((C2 - 16.0 * 2f64.sqrt()).abs() < 1e-13);
        assert!((C4 - 4.0 * 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn p_out_of_range_rejected() {
        assert!(matches!(SigmSchedule::<f64>::new(2.5, 1.0, 0.0, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(SigmSchedule::<f64>::new(0.5, 1.0, 0.0, 1.0), Err(Error::InvalidParameter(_))));
    }
}
