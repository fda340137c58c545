//! Randomized directional-derivative methods: ARDD, RDD and their restarted
//! strongly convex versions, plus the parameter tables.

use crate::error::{Error, Result};
use crate::linalg;
use crate::oracles::{minibatch_dirderiv_grad, sample_sphere, DirDerivOracle};
use crate::prox::{FeasibleSet, ProxSetup};
use crate::scalar::Real;
use crate::trace::{is_logged, Trace};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Constant multiplying the iteration counts read off the tables.
pub const C_N: f64 = 20.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ArddConfig<T> {
    /// 1 or 2.
    pub p: u8,
    pub n: usize,
    pub l2: T,
    pub sigma: T,
    pub delta_zeta: T,
    pub delta_eta: T,
    pub rho_n: T,
    /// `Θ_p = V[z₀](x*)`.
    pub theta: T,
    pub mu: T,
    pub r_p: T,
    pub omega: T,
}

impl<T: Real> ArddConfig<T> {
    /// Defaults: `ρ_n = 1` for `p = 2`, `16 ln n / n` for `p = 1`; `Ω_p` from the prox setup.
    pub fn new(p: u8, n: usize, l2: T) -> Result<Self> {
        let setup = prox_for(p, n)?;
        Ok(ArddConfig {
            p,
            n,
            l2,
            sigma: T::zero(),
            delta_zeta: T::zero(),
            delta_eta: T::zero(),
            rho_n: default_rho(p, n),
            theta: T::one(),
            mu: T::zero(),
            r_p: T::one(),
            omega: setup.omega(),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.p != 1 && self.p != 2 {
            return Err(Error::InvalidParameter(format!("p must be 1 or 2, got {}", self.p)));
        }
        if !(self.l2 > T::zero()) || !(self.rho_n > T::zero()) {
            return Err(Error::InvalidParameter("L2 and rho_n must be positive".into()));
        }
        Ok(())
    }

    fn noise_mix(&self) -> f64 {
        self.delta_zeta.f64().sqrt() / 2.0 + 2.0 * self.delta_eta.f64()
    }

    /// Right-hand side of the ARDD expectation bound after `N` steps with batch `m`.
    pub fn ardd_bound(&self, big_n: usize, m: usize) -> f64 {
        let (n, l2, rho, th) = (self.n as f64, self.l2.f64(), self.rho_n.f64(), self.theta.f64());
        let bn = big_n as f64;
        let w = self.noise_mix();
        384.0 * th * n * n * rho * l2 / (bn * bn)
            + 4.0 * bn / (n * l2) * self.sigma.f64().powi(2) / m as f64
            + 61.0 * bn / (24.0 * l2) * self.delta_zeta.f64()
            + 122.0 * bn / (3.0 * l2) * self.delta_eta.f64().powi(2)
            + 12.0 * (2.0 * n * th).sqrt() / (bn * bn) * w
            + bn * bn / (12.0 * n * rho * l2) * w * w
    }

    /// Right-hand side of the RDD expectation bound.
    pub fn rdd_bound(&self, big_n: usize, m: usize) -> f64 {
        let (n, l2, rho, th) = (self.n as f64, self.l2.f64(), self.rho_n.f64(), self.theta.f64());
        let bn = big_n as f64;
        let w = self.noise_mix();
        384.0 * n * rho * l2 * th / bn
            + 2.0 / l2 * self.sigma.f64().powi(2) / m as f64
            + n / (12.0 * l2) * self.delta_zeta.f64()
            + 4.0 * n / (3.0 * l2) * self.delta_eta.f64().powi(2)
            + 8.0 * (2.0 * n * th).sqrt() / bn * w
            + bn / (3.0 * l2 * rho) * w * w
    }

    pub fn arddsc_n0(&self) -> usize {
        let a = 384.0 * (self.n as f64).powi(2) * self.rho_n.f64();
        (8.0 * a * self.l2.f64() * self.omega.f64() / self.mu.f64()).sqrt().ceil() as usize
    }

    pub fn rddsc_n0(&self) -> usize {
        let a = 384.0 * self.n as f64 * self.rho_n.f64();
        (8.0 * a * self.l2.f64() * self.omega.f64() / self.mu.f64()).ceil() as usize
    }

    /// `Δ` of the ARDDsc bound.
    pub fn arddsc_delta(&self) -> f64 {
        let n0 = self.arddsc_n0() as f64;
        let (n, l2, rho) = (self.n as f64, self.l2.f64(), self.rho_n.f64());
        let w = self.noise_mix();
        61.0 * n0 / (24.0 * l2) * self.delta_zeta.f64()
            + 122.0 * n0 / (3.0 * l2) * self.delta_eta.f64().powi(2)
            + 12.0 * (2.0 * n * self.r_p.f64().powi(2) * self.omega.f64()).sqrt() / (n0 * n0) * w
            + n0 * n0 / (12.0 * n * rho * l2) * w * w
    }

    /// `Δ` of the RDDsc bound.
    pub fn rddsc_delta(&self) -> f64 {
        let n0 = self.rddsc_n0() as f64;
        let (n, l2, rho) = (self.n as f64, self.l2.f64(), self.rho_n.f64());
        let w = self.noise_mix();
        n / (12.0 * l2) * self.delta_zeta.f64()
            + 4.0 * n / (3.0 * l2) * self.delta_eta.f64().powi(2)
            + 8.0 * (2.0 * n * self.r_p.f64().powi(2) * self.omega.f64()).sqrt() / n0 * w
            + n0 / (3.0 * l2 * rho) * w * w
    }

    /// `μR²/2·2^{−K} + 2Δ`.
    pub fn sc_bound(&self, k: usize, accelerated: bool) -> f64 {
        let d = if accelerated { self.arddsc_delta() } else { self.rddsc_delta() };
        self.mu.f64() * self.r_p.f64().powi(2) / 2.0 * 0.5f64.powi(k as i32) + 2.0 * d
    }
}

pub fn default_rho<T: Real>(p: u8, n: usize) -> T {
    if p == 1 {
        T::of(16.0 * (n as f64).ln() / n as f64)
    } else {
        T::one()
    }
}

/// Prox setup matching `p`: κ-norm for `p = 1`, Euclidean for `p = 2`.
pub fn prox_for<T: Real>(p: u8, n: usize) -> Result<ProxSetup<T>> {
    match p {
        1 => ProxSetup::kappa(n),
        2 => Ok(ProxSetup::euclidean(n)),
        _ => Err(Error::InvalidParameter(format!("p must be 1 or 2, got {p}"))),
    }
}

#[derive(Clone, Debug)]
pub struct ArddRun<T> {
    pub point: Vec<T>,
    /// Columns `k, alpha, tau, gap, oracle_calls`.
    pub trace: Trace,
}

#[derive(Clone, Debug)]
pub struct RunOptions<T> {
    pub f_star: Option<T>,
    pub log_dense: usize,
}

impl<T> Default for RunOptions<T> {
    fn default() -> Self {
        RunOptions { f_star: None, log_dense: usize::MAX }
    }
}

fn gap_of<T: Real>(oracle: &DirDerivOracle<T>, x: &[T], f_star: Option<T>) -> f64 {
    f_star.map(|s| (oracle.f.value(x) - s).f64()).unwrap_or(f64::NAN)
}

fn finite<T: Real>(x: &[T]) -> Result<()> {
    if linalg::all_finite(x) {
        Ok(())
    } else {
        Err(Error::Diverged("non-finite iterate".into()))
    }
}

fn ardd_with_setup<T: Real, R: Rng + ?Sized>(
    oracle: &mut DirDerivOracle<T>,
    cfg: &ArddConfig<T>,
    setup: &ProxSetup<T>,
    x0: &[T],
    big_n: usize,
    m: usize,
    rng: &mut R,
    opts: &RunOptions<T>,
) -> Result<ArddRun<T>> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::InvalidParameter("batch size must be >= 1".into()));
    }
    let n = x0.len();
    let nn = T::of_usize(n);
    let mut trace = Trace::new(&["k", "alpha", "tau", "gap", "oracle_calls"]);
    let calls0 = oracle.calls();
    let mut y = x0.to_vec();
    let mut z = x0.to_vec();
    trace.push(vec![0.0, f64::NAN, f64::NAN, gap_of(oracle, &y, opts.f_star), 0.0]);
    let denom = T::of(96.0) * nn * nn * cfg.rho_n * cfg.l2;
    for k in 0..big_n {
        let alpha = T::of_usize(k + 2) / denom;
        let tau = T::of(2.0) / T::of_usize(k + 2);
        let e: Vec<T> = sample_sphere(rng, n);
        let x = linalg::lincomb(tau, &z, T::one() - tau, &y);
        let g = minibatch_dirderiv_grad(oracle, &x, &e, m);
        y = linalg::lincomb(T::one(), &x, -T::one() / (T::of(2.0) * cfg.l2), &g);
        z = setup.mirror_step(&z, &linalg::scale(alpha * nn, &g), T::one(), &FeasibleSet::Full)?;
        finite(&y)?;
        if is_logged(k + 1, opts.log_dense) || k + 1 == big_n {
            trace.push(vec![
                (k + 1) as f64,
                alpha.f64(),
                tau.f64(),
                gap_of(oracle, &y, opts.f_star),
                (oracle.calls() - calls0) as f64,
            ]);
        }
    }
    Ok(ArddRun { point: y, trace })
}

/// Accelerated method; returns `y_N`.
#[allow(clippy::too_many_arguments)]
pub fn ardd_run<T: Real, R: Rng + ?Sized>(
    oracle: &mut DirDerivOracle<T>,
    cfg: &ArddConfig<T>,
    x0: &[T],
    big_n: usize,
    m: usize,
    rng: &mut R,
    opts: &RunOptions<T>,
) -> Result<ArddRun<T>> {
    let setup = prox_for::<T>(cfg.p, x0.len())?.with_center(x0.to_vec())?;
    ardd_with_setup(oracle, cfg, &setup, x0, big_n, m, rng, opts)
}

fn rdd_with_setup<T: Real, R: Rng + ?Sized>(
    oracle: &mut DirDerivOracle<T>,
    cfg: &ArddConfig<T>,
    setup: &ProxSetup<T>,
    x0: &[T],
    big_n: usize,
    m: usize,
    rng: &mut R,
    opts: &RunOptions<T>,
) -> Result<ArddRun<T>> {
    cfg.validate()?;
    if m == 0 || big_n == 0 {
        return Err(Error::InvalidParameter("need N >= 1 and m >= 1".into()));
    }
    let n = x0.len();
    let nn = T::of_usize(n);
    let alpha = T::one() / (T::of(48.0) * nn * cfg.rho_n * cfg.l2);
    let mut trace = Trace::new(&["k", "alpha", "tau", "gap", "oracle_calls"]);
    let calls0 = oracle.calls();
    let mut x = x0.to_vec();
    let mut sum = vec![T::zero(); n];
    for k in 0..big_n {
        linalg::axpy(T::one(), &x, &mut sum);
        let kk = k + 1;
        if is_logged(kk, opts.log_dense) || kk == big_n {
            let avg = linalg::scale(T::one() / T::of_usize(kk), &sum);
            trace.push(vec![kk as f64, alpha.f64(), f64::NAN, gap_of(oracle, &avg, opts.f_star), (oracle.calls() - calls0) as f64]);
        }
        let e: Vec<T> = sample_sphere(rng, n);
        let g = minibatch_dirderiv_grad(oracle, &x, &e, m);
        x = setup.mirror_step(&x, &linalg::scale(alpha * nn, &g), T::one(), &FeasibleSet::Full)?;
        finite(&x)?;
    }
    Ok(ArddRun { point: linalg::scale(T::one() / T::of_usize(big_n), &sum), trace })
}

/// Non-accelerated method; returns the average of `x₀, …, x_{N−1}`.
#[allow(clippy::too_many_arguments)]
pub fn rdd_run<T: Real, R: Rng + ?Sized>(
    oracle: &mut DirDerivOracle<T>,
    cfg: &ArddConfig<T>,
    x0: &[T],
    big_n: usize,
    m: usize,
    rng: &mut R,
    opts: &RunOptions<T>,
) -> Result<ArddRun<T>> {
    let setup = prox_for::<T>(cfg.p, x0.len())?;
    rdd_with_setup(oracle, cfg, &setup, x0, big_n, m, rng, opts)
}

#[derive(Clone, Debug)]
pub struct RestartRun<T> {
    pub u: Vec<T>,
    pub stages: Vec<Vec<T>>,
    /// `(N₀, m_k, R_k)` per stage.
    pub plans: Vec<(usize, usize, f64)>,
    /// Columns `stage, gap, oracle_calls, bound`.
    pub trace: Trace,
}

fn sc_run<T: Real, R: Rng + ?Sized>(
    oracle: &mut DirDerivOracle<T>,
    cfg: &ArddConfig<T>,
    x0: &[T],
    big_k: usize,
    rng: &mut R,
    f_star: Option<T>,
    accelerated: bool,
) -> Result<RestartRun<T>> {
    cfg.validate()?;
    if !(cfg.mu > T::zero()) || !(cfg.r_p > T::zero()) {
        return Err(Error::InvalidParameter("need mu_p > 0 and R_p > 0".into()));
    }
    let n0 = if accelerated { cfg.arddsc_n0() } else { cfg.rddsc_n0() }.max(1);
    let delta = if accelerated { cfg.arddsc_delta() } else { cfg.rddsc_delta() };
    let (s2, l2, mu, r2) = (cfg.sigma.f64().powi(2), cfg.l2.f64(), cfg.mu.f64(), cfg.r_p.f64().powi(2));
    let mut trace = Trace::new(&["stage", "gap", "oracle_calls", "bound"]);
    let calls0 = oracle.calls();
    let mut u = x0.to_vec();
    let mut stages = vec![u.clone()];
    let mut plans = Vec::new();
    trace.push(vec![0.0, gap_of(oracle, &u, f_star), 0.0, cfg.sc_bound(0, accelerated)]);
    let inner = RunOptions { f_star: None, log_dense: 0 };
    for k in 0..big_k {
        let pk = 2f64.powi(k as i32);
        let m = if accelerated {
            32.0 * s2 * n0 as f64 * pk / (cfg.n as f64 * l2 * mu * r2)
        } else {
            16.0 * s2 * pk / (l2 * mu * r2)
        };
        let m_k = (m.ceil() as usize).max(1);
        let r_k = (r2 / pk + 4.0 * delta / mu * (1.0 - 1.0 / pk)).sqrt();
        // R_k² d((x − u_k)/R_k) = d(x − u_k) for the 2-homogeneous setups used here.
        let setup = prox_for::<T>(cfg.p, x0.len())?.with_center(u.clone())?;
        let run = if accelerated {
            ardd_with_setup(oracle, cfg, &setup, &u, n0, m_k, rng, &inner)?
        } else {
            rdd_with_setup(oracle, cfg, &setup, &u, n0, m_k, rng, &inner)?
        };
        u = run.point;
        stages.push(u.clone());
        plans.push((n0, m_k, r_k));
        trace.push(vec![(k + 1) as f64, gap_of(oracle, &u, f_star), (oracle.calls() - calls0) as f64, cfg.sc_bound(k + 1, accelerated)]);
    }
    Ok(RestartRun { u, stages, plans, trace })
}

pub fn arddsc_run<T: Real, R: Rng + ?Sized>(
    oracle: &mut DirDerivOracle<T>,
    cfg: &ArddConfig<T>,
    x0: &[T],
    big_k: usize,
    rng: &mut R,
    f_star: Option<T>,
) -> Result<RestartRun<T>> {
    sc_run(oracle, cfg, x0, big_k, rng, f_star, true)
}

/// Restarted RDD; each stage continues from the averaged output of the previous one.
pub fn rddsc_run<T: Real, R: Rng + ?Sized>(
    oracle: &mut DirDerivOracle<T>,
    cfg: &ArddConfig<T>,
    x0: &[T],
    big_k: usize,
    rng: &mut R,
    f_star: Option<T>,
) -> Result<RestartRun<T>> {
    sc_run(oracle, cfg, x0, big_k, rng, f_star, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Ardd,
    Rdd,
    Arddsc,
    Rddsc,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ardd" => Ok(Variant::Ardd),
            "rdd" => Ok(Variant::Rdd),
            "arddsc" => Ok(Variant::Arddsc),
            "rddsc" => Ok(Variant::Rddsc),
            _ => Err(Error::InvalidParameter(format!("unknown variant {s}"))),
        }
    }
}

/// Table entries with the omitted constants fixed (`c_N` on iteration counts, 1 elsewhere).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamChoice {
    /// `N` for the plain methods, `K` for the restarted ones.
    pub iterations: usize,
    /// Batch size (plain methods); restarted methods use their per-stage rule.
    pub batch: Option<usize>,
    pub delta_zeta: f64,
    pub delta_eta: f64,
    pub calls: f64,
}

fn min3(a: f64, b: f64, c: f64) -> f64 {
    a.min(b).min(c)
}

pub fn select_params<T: Real>(eps: f64, cfg: &ArddConfig<T>, variant: Variant) -> Result<ParamChoice> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    cfg.validate()?;
    let n = cfg.n as f64;
    let ln = n.ln();
    let (l2, th, s2) = (cfg.l2.f64(), cfg.theta.f64(), cfg.sigma.f64().powi(2));
    let (mu, r2, om) = (cfg.mu.f64(), cfg.r_p.f64().powi(2), cfg.omega.f64());
    let p1 = cfg.p == 1;
    let ceil = |v: f64| v.ceil().max(1.0) as usize;
    Ok(match variant {
        Variant::Ardd => {
            let nn = if p1 { n * ln } else { n * n };
            let big_n = (nn * l2 * th / eps).sqrt();
            let mf = if p1 { (ln / n).sqrt() } else { 1.0 };
            let m = (mf * s2 / eps.powf(1.5) * (th / l2).sqrt()).max(1.0);
            let (dz, de) = if p1 {
                (
                    min3(n * ln * ln * l2 * l2 * th, eps * eps / (n * th), eps.powf(1.5) / (n * ln).sqrt() * (l2 / th).sqrt()),
                    min3(n.sqrt() * ln * l2 * th.sqrt(), eps / (n * th).sqrt(), eps.powf(0.75) / (n * ln).powf(0.25) * (l2 / th).powf(0.25)),
                )
            } else {
                (
                    min3(n.powi(3) * l2 * l2 * th, eps * eps / (n * th), eps.powf(1.5) / n * (l2 / th).sqrt()),
                    min3(n.powf(1.5) * l2 * th.sqrt(), eps / (n * th).sqrt(), eps.powf(0.75) / n.sqrt() * (l2 / th).powf(0.25)),
                )
            };
            let calls = big_n.max(s2 * th * if p1 { ln } else { n } / (eps * eps));
            ParamChoice { iterations: C_N as usize * ceil(big_n), batch: Some(ceil(m)), delta_zeta: dz, delta_eta: de, calls }
        }
        Variant::Rdd => {
            let big_n = l2 * th * if p1 { ln } else { n } / eps;
            let m = (s2 / (eps * l2)).max(1.0);
            let (dz, de) = if p1 {
                (
                    min3(ln * ln / n * l2 * l2 * th, eps * eps / (n * th), eps * l2 / n),
                    min3(ln / n.sqrt() * l2 * th.sqrt(), eps / (n * th).sqrt(), (eps * l2 / n).sqrt()),
                )
            } else {
                (min3(n * l2 * l2 * th, eps * eps / (n * th), eps * l2 / n), min3(n.sqrt() * l2 * th.sqrt(), eps / (n * th).sqrt(), (eps * l2 / n).sqrt()))
            };
            let calls = big_n.max(s2 * th * if p1 { ln } else { n } / (eps * eps));
            ParamChoice { iterations: C_N as usize * ceil(big_n), batch: Some(ceil(m)), delta_zeta: dz, delta_eta: de, calls }
        }
        Variant::Arddsc | Variant::Rddsc => {
            if !(mu > 0.0) {
                return Err(Error::InvalidParameter("strongly convex variants need mu_p > 0".into()));
            }
            let k = ceil((mu * r2 / eps).log2());
            let lg = (mu * r2 / eps).log2().max(0.0);
            let (dz, de, calls) = match (variant, p1) {
                (Variant::Arddsc, true) => (
                    min3(eps * (l2 * mu / (n * ln * om)).sqrt(), eps * eps * n * ln * ln * l2 * l2 * om / (r2 * mu * mu), eps * mu / (n * om)),
                    min3(eps.sqrt() * (l2 * mu / (n * ln * om)).powf(0.25), eps * n.sqrt() * ln * l2 * om.sqrt() / (r2.sqrt() * mu), (eps * mu / (n * om)).sqrt()),
                    ((n * ln * l2 * om / mu).sqrt() * lg).max(s2 * om * ln / (mu * eps)),
                ),
                (Variant::Arddsc, false) => (
                    min3(eps * (l2 * mu / (n * n * om)).sqrt(), eps * eps * n.powi(3) * l2 * l2 * om / (r2 * mu * mu), eps * mu / (n * om)),
                    min3(eps.sqrt() * (l2 * mu / (n * n * om)).powf(0.25), eps * n.powf(1.5) * l2 * om.sqrt() / (r2.sqrt() * mu), (eps * mu / (n * om)).sqrt()),
                    (n * (l2 * om / mu).sqrt() * lg).max(n * s2 * om / (mu * eps)),
                ),
                (_, true) => (
                    min3(eps * l2 / n, eps * eps * ln * ln * l2 * l2 / (n * r2 * mu * mu), eps * mu / (n * om)),
                    min3((eps * l2 / n).sqrt(), eps * ln * l2 / (n.sqrt() * r2.sqrt() * mu), (eps * mu / (n * om)).sqrt()),
                    (l2 * om * ln / mu * lg).max(s2 * om / (mu * eps)),
                ),
                (_, false) => (
                    min3(eps * l2 / n, eps * eps * n * l2 * l2 / (r2 * mu * mu), eps * mu / (n * om)),
                    min3((eps * l2 / n).sqrt(), eps * n.sqrt() * l2 / (r2.sqrt() * mu), (eps * mu / (n * om)).sqrt()),
                    (n * l2 * om / mu * lg).max(n * s2 * om / (mu * eps)),
                ),
            };
            ParamChoice { iterations: k, batch: None, delta_zeta: dz, delta_eta: de, calls }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_defaults() {
        assert_eq!(default_rho::<f64>(2, 50), 1.0);
        assert!((default_rho::<f64>(1, 50) - 16.0 * 50f64.ln() / 50.0).abs() < 1e-15);
    }

    #[test]
    fn variant_parse() {
        assert_eq!("ARDDsc".parse::<Variant>().unwrap(), Variant::Arddsc);
        assert!("foo".parse::<Variant>().is_err());
    }
}
