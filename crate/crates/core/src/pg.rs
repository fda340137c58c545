//! Projected gradient methods driven by inexact oracles: the randomized gradient-free
//! method with a fixed step and the adaptive method with a doubling line search.

use crate::error::{Error, Result};
use crate::linalg::{self, norm2};
use crate::oracles::{sample_sphere, DeltaLOracle, ZeroOrderOracle};
use crate::prox::{project_ball, Composite, FeasibleSet, ProxSetup};
use crate::rng;
use crate::scalar::Real;
use crate::trace::Trace;

/// Doubling cap of the adaptive line search.
pub const MAX_DOUBLINGS: usize = 60;

/// Inexact zero-order oracle with a fixed accuracy.
pub trait ValueOracle<T> {
    fn value(&mut self, x: &[T]) -> Result<T>;
}

impl<T: Real> ValueOracle<T> for ZeroOrderOracle<T> {
    fn value(&mut self, x: &[T]) -> Result<T> {
        let v = self.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Oracle("non-finite function value".into()))
        }
    }
}

/// First-order oracle whose accuracy is chosen per call.
pub trait InexactOracle<T> {
    fn dim(&self) -> usize;
    /// `f̃(x, δ)`.
    fn value(&mut self, x: &[T], delta: T) -> Result<T>;
    /// `(f̃(x, δ), g̃(x, δ))`.
    fn eval(&mut self, x: &[T], delta: T) -> Result<(T, Vec<T>)>;
}

/// A [`DeltaLOracle`] ignores the requested accuracy and answers with its own `δ`.
impl<T: Real> InexactOracle<T> for DeltaLOracle<T> {
    fn dim(&self) -> usize {
        DeltaLOracle::dim(self)
    }

    fn value(&mut self, x: &[T], _delta: T) -> Result<T> {
        Ok(DeltaLOracle::eval(self, x).0)
    }

    fn eval(&mut self, x: &[T], _delta: T) -> Result<(T, Vec<T>)> {
        Ok(DeltaLOracle::eval(self, x))
    }
}

/// Step-2 quantities of the gradient-free method for accuracy `ε` on a ball of radius `R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GfpgmParams<T> {
    pub steps: usize,
    pub delta: T,
    pub tau: T,
    pub h: T,
}

impl<T: Real> GfpgmParams<T> {
    pub fn for_accuracy(m: usize, l: T, r: T, eps: T) -> Result<Self> {
        if m == 0 || !(l > T::zero()) || !(r > T::zero()) || !(eps > T::zero()) {
            return Err(Error::InvalidParameter("need m ≥ 1 and L, R, ε > 0".into()));
        }
        let mt = T::of_usize(m);
        let m8 = mt + T::of(8.0);
        let steps = (T::of(128.0) * mt * l * r * r / eps).ceil();
        if !(steps.f64() < 1e12) {
            return Err(Error::InvalidParameter("step count overflows".into()));
        }
        let delta = eps.powf(T::of(1.5)) * T::of(2.0).sqrt() / (T::of(16.0) * mt * r * (l * m8).sqrt());
        let tau = (T::of(2.0) * eps / (l * m8)).sqrt();
        Ok(GfpgmParams { steps: steps.f64() as usize, delta, tau, h: gfpgm_step(m, l) })
    }
}

/// `h = 1/(8mL)`.
pub fn gfpgm_step<T: Real>(m: usize, l: T) -> T {
    T::one() / (T::of(8.0) * T::of_usize(m) * l)
}

/// Right-hand side of the expected-gap bound of the gradient-free method after `M` steps.
pub fn gfpgm_bound<T: Real>(m: usize, l: T, d: T, steps: usize, tau: T, delta: T) -> T {
    let mt = T::of_usize(m);
    T::of(8.0) * mt * l * d * d / T::of_usize(steps + 1)
        + tau * tau * l * (mt + T::of(8.0)) / T::of(8.0)
        + delta * mt * d / (T::of(4.0) * tau)
        + delta * delta * mt / (l * tau * tau)
}

#[derive(Clone, Debug)]
pub struct GfpgmRun<T> {
    /// Iterate with the smallest recorded oracle value.
    pub best: Vec<T>,
    pub best_value: T,
    pub last: Vec<T>,
    pub oracle_calls: u64,
    /// Columns `k, value, best_value`.
    pub trace: Trace,
}

/// Gradient-free projected method on the ball `{‖x − c‖ ≤ radius}`.
///
/// Runs `steps + 1` iterations (`k = 0..=M`) with `x_{k+1} = Π(x_k − h g_τ(x_k, δ))`,
/// where `g_τ = (m/τ)(f̃(x + τξ) − f̃(x)) ξ`. The best point is chosen by the recorded
/// oracle values `f̃(x_k)`, the only values the method sees.
pub fn gfpgm_run<T: Real, O: ValueOracle<T> + ?Sized>(
    oracle: &mut O,
    x0: &[T],
    center: &[T],
    radius: T,
    h: T,
    tau: T,
    steps: usize,
    seed: u64,
) -> Result<GfpgmRun<T>> {
    let m = x0.len();
    if m == 0 || center.len() != m {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    if !(h > T::zero()) || !(tau > T::zero()) {
        return Err(Error::InvalidParameter("h and τ must be positive".into()));
    }
    let mut x = project_ball(x0, center, radius);
    let mut r = rng::stream(seed, 0);
    let mut trace = Trace::new(&["k", "value", "best_value"]);
    let mut best = x.clone();
    let mut best_value = T::infinity();
    let mut calls = 0u64;
    for k in 0..=steps {
        let f0 = oracle.value(&x)?;
        calls += 1;
        if f0 < best_value {
            best_value = f0;
            best = x.clone();
        }
        trace.push(vec![k as f64, f0.f64(), best_value.f64()]);
        if k == steps {
            break;
        }
        let xi: Vec<T> = sample_sphere(&mut r, m);
        let xp: Vec<T> = x.iter().zip(&xi).map(|(&a, &e)| a + tau * e).collect();
        let fp = oracle.value(&xp)?;
        calls += 1;
        let c = T::of_usize(m) / tau * (fp - f0);
        let step: Vec<T> = x.iter().zip(&xi).map(|(&a, &e)| a - h * c * e).collect();
        x = project_ball(&step, center, radius);
    }
    Ok(GfpgmRun { best, best_value, last: x, oracle_calls: calls, trace })
}

#[derive(Clone, Debug)]
pub struct AdaptivePgOptions<T> {
    pub l0: T,
    pub eps: T,
    pub max_iter: usize,
    pub composite: Composite<T>,
    /// Stop on `z² ≤ ε` instead of `z ≤ ε`.
    pub squared_stop: bool,
}

impl<T: Real> AdaptivePgOptions<T> {
    pub fn new(l0: T, eps: T) -> Self {
        AdaptivePgOptions { l0, eps, max_iter: 100_000, composite: Composite::Zero, squared_stop: false }
    }
}

#[derive(Clone, Debug)]
pub struct AdaptivePgRun<T> {
    /// `x_{K+1}` for the best `K`.
    pub x: Vec<T>,
    pub last: Vec<T>,
    /// `min_k ‖M_k(x_k − x_{k+1})‖₂`.
    pub z: T,
    pub best_k: usize,
    pub iterations: usize,
    /// Total number of doublings of `M_k`.
    pub inner_steps: usize,
    /// Number of acceptance tests evaluated (doublings plus one per iteration).
    pub trials: usize,
    pub converged: bool,
    /// Columns `k, m_k, z, value, inner_steps, delta`.
    pub trace: Trace,
}

/// Adaptive projected gradient method with a `(δ, L)`-oracle whose accuracy follows
/// `δ = ε/(16 M_k)`.
///
/// The prox-function is `½‖x‖₂²`. Stops once `z = min_k ‖M_k(x_k − x_{k+1})‖ ≤ ε`
/// (or `z² ≤ ε`). The acceptance slack only guarantees `z² ≲ ε/2`, so the first rule is
/// reachable only when `ε > ½`; otherwise the run ends at `max_iter`.
pub fn adaptive_pg_run<T: Real, O: InexactOracle<T> + ?Sized>(
    oracle: &mut O,
    x0: &[T],
    set: &FeasibleSet<T>,
    opts: &AdaptivePgOptions<T>,
) -> Result<AdaptivePgRun<T>> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty starting point".into()));
    }
    if !(opts.l0 > T::zero()) || !(opts.eps > T::zero()) {
        return Err(Error::InvalidParameter("L₀ and ε must be positive".into()));
    }
    if matches!((set, opts.composite), (FeasibleSet::Ball { .. }, Composite::L1(w)) if w != T::zero()) {
        return Err(Error::Unsupported("ℓ1 composite term on a ball".into()));
    }
    let prox = ProxSetup::<T>::euclidean(n);
    let two = T::of(2.0);
    let eps = opts.eps;
    let mut x = prox.mirror_step(x0, &vec![T::zero(); n], T::one(), set)?;
    let mut l_k = opts.l0;
    let mut z = T::infinity();
    let mut best_x = x.clone();
    let mut best_k = 0;
    let mut inner = 0usize;
    let mut trials = 0usize;
    let mut trace = Trace::new(&["k", "m_k", "z", "value", "inner_steps", "delta"]);
    let mut k = 0;
    let mut converged = false;
    while k < opts.max_iter {
        let mut m_k = l_k;
        let mut doublings = 0;
        let (w, fx, delta) = loop {
            let delta = eps / (T::of(16.0) * m_k);
            let (fx, g) = oracle.eval(&x, delta)?;
            if !fx.is_finite() || !linalg::all_finite(&g) {
                return Err(Error::Oracle("non-finite oracle answer".into()));
            }
            let w = prox.mirror_step_composite(&x, &g, m_k, T::one(), opts.composite, set)?;
            let fw = oracle.value(&w, delta)?;
            trials += 1;
            let d = linalg::sub(&w, &x);
            let model = fx + linalg::dot(&g, &d) + m_k / two * linalg::norm2_sq(&d) + eps / (T::of(8.0) * m_k);
            if fw <= model {
                break (w, fx, delta);
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::Diverged(format!("line search exceeded {MAX_DOUBLINGS} doublings at iteration {k}")));
            }
            m_k = m_k * two;
        };
        inner += doublings;
        let zk = m_k * norm2(&linalg::sub(&x, &w));
        if zk < z {
            z = zk;
            best_k = k;
            best_x = w.clone();
        }
        trace.push(vec![k as f64, m_k.f64(), z.f64(), fx.f64(), inner as f64, delta.f64()]);
        x = w;
        l_k = m_k / two;
        k += 1;
        if (if opts.squared_stop { z * z } else { z }) <= eps {
            converged = true;
            break;
        }
    }
    if !converged {
        trace.note(format!("stopped at the iteration cap with z = {:e}", z.f64()));
    }
    Ok(AdaptivePgRun { x: best_x, last: x, z, best_k, iterations: k, inner_steps: inner, trials, converged, trace })
}

/// `4L(ψ(x₀) − ψ*)/(M + 1) + ε/2`, the bound on `z²` after `M` iterations.
pub fn adaptive_pg_bound<T: Real>(l: T, gap0: T, iterations: usize, eps: T) -> T {
    T::of(4.0) * l * gap0 / T::of_usize(iterations + 1) + eps / T::of(2.0)
}

/// `M + log₂(2L/L₀)`.
pub fn inner_step_budget(iterations: usize, l: f64, l0: f64) -> f64 {
    iterations as f64 + (2.0 * l / l0).log2()
}
