//! Algorithm table and the glue that turns `(config, seed)` into a trace.

use super::{BoundSpec, BoundTarget, ExperimentConfig};
use crate::ardd::{self, ArddConfig, RunOptions, Variant};
use crate::barycenter::{self, BarycenterOptions, BarycenterProblem};
use crate::error::{Error, Result};
use crate::games::{self, GameOptions, GameSpec, Integrator};
use crate::oracles::{DeltaLOracle, DirDerivOracle, Quadratic, SmoothFn, StochasticDeltaLOracle};
use crate::pagerank::{self, Dataset, GenConfig};
use crate::pg::{self, AdaptivePgOptions, GfpgmParams};
use crate::primal_dual::{self as pd, ApdagdOptions, ApdsgmOptions, ChainProblem, DenseProblem, LinConstrainedProblem, NoisyDual, PdugdsdrOptions};
use crate::prox::{Composite, FeasibleSet, ProxSetup};
use crate::sigm::{self, RestartConfig, SigmOptions, SigmSchedule};
use crate::trace::Trace;
use crate::{linalg, ot, rng};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmInfo {
    pub id: &'static str,
    pub module: &'static str,
    pub summary: &'static str,
    /// What the optional problem file holds.
    pub problem: &'static str,
    pub params: &'static [&'static str],
}

pub const ALGORITHMS: &[AlgorithmInfo] = &[
    AlgorithmInfo {
        id: "apdagd",
        module: "primal_dual",
        summary: "adaptive accelerated dual gradient on the hyperplane projection",
        problem: "{\"c\": [...]}",
        params: &["n", "l0", "eps_f", "eps_eq", "max_iter", "log_dense"],
    },
    AlgorithmInfo {
        id: "apdsgm",
        module: "primal_dual",
        summary: "stochastic accelerated dual method, Gaussian noise on the dual gradient",
        problem: "{\"c\": [...]}",
        params: &["n", "sd", "eps", "iterations", "log_dense"],
    },
    AlgorithmInfo {
        id: "pdugdsdr",
        module: "primal_dual",
        summary: "universal dual method with line search, no smoothness constant",
        problem: "{\"c\": [...]}",
        params: &["n", "instance", "eps", "slack", "max_iter", "log_dense"],
    },
    AlgorithmInfo {
        id: "sigm",
        module: "sigm",
        summary: "stochastic intermediate gradient method on a diagonal quadratic",
        problem: "none",
        params: &["n", "l", "p", "sigma", "iterations", "batch", "instance", "log_dense"],
    },
    AlgorithmInfo {
        id: "sigm_restart",
        module: "sigm",
        summary: "restarted SIGM on a strongly convex diagonal quadratic",
        problem: "none",
        params: &["n", "l", "sigma", "outer", "instance"],
    },
    AlgorithmInfo {
        id: "ardd",
        module: "ardd",
        summary: "accelerated random directional derivative method",
        problem: "none",
        params: &["n", "lmin", "lmax", "p", "iterations", "batch", "sigma", "eps", "instance", "log_dense"],
    },
    AlgorithmInfo {
        id: "rdd",
        module: "ardd",
        summary: "non-accelerated random directional derivative method",
        problem: "none",
        params: &["n", "lmin", "lmax", "p", "iterations", "batch", "sigma", "eps", "instance", "log_dense"],
    },
    AlgorithmInfo {
        id: "arddsc",
        module: "ardd",
        summary: "restarted ARDD for strongly convex objectives",
        problem: "none",
        params: &["n", "lmin", "lmax", "p", "stages", "sigma", "instance"],
    },
    AlgorithmInfo {
        id: "adaptive_pg",
        module: "pg",
        summary: "adaptive projected gradient with an inexact oracle on a ball",
        problem: "none",
        params: &["n", "l", "l0", "eps", "max_iter", "radius"],
    },
    AlgorithmInfo {
        id: "pagerank_adaptive",
        module: "pagerank",
        summary: "adaptive projected gradient on the supervised PageRank loss",
        problem: "dataset JSON",
        params: &["queries", "vertices", "instance", "l0", "eps", "max_iter"],
    },
    AlgorithmInfo {
        id: "pagerank_gfpgm",
        module: "pagerank",
        summary: "gradient-free projected method on the supervised PageRank loss",
        problem: "dataset JSON",
        params: &["queries", "vertices", "instance", "eps", "steps", "h", "tau", "delta1", "max_steps"],
    },
    AlgorithmInfo {
        id: "sinkhorn",
        module: "ot",
        summary: "Sinkhorn scaling, log-domain unless naive",
        problem: "{n, C, r, c}",
        params: &["n", "gamma", "gamma_rel", "max_iter", "tol", "naive"],
    },
    AlgorithmInfo {
        id: "apdagd_ot",
        module: "ot",
        summary: "APDAGD on entropic OT at a fixed gamma",
        problem: "{n, C, r, c}",
        params: &["n", "gamma", "gamma_rel", "max_iter"],
    },
    AlgorithmInfo {
        id: "approx_ot",
        module: "ot",
        summary: "APDAGD + rounding pipeline to an eps-optimal transport plan",
        problem: "{n, C, r, c}",
        params: &["n", "eps", "eps_rel", "max_iter", "lp"],
    },
    AlgorithmInfo {
        id: "sda",
        module: "games",
        summary: "simple dual averaging on a discretized game",
        problem: "game spec JSON",
        params: &["game", "t", "integrator", "iterations", "gamma", "kappa", "cert_iters"],
    },
    AlgorithmInfo {
        id: "dualext",
        module: "games",
        summary: "dual extrapolation on a discretized game",
        problem: "game spec JSON",
        params: &["game", "t", "integrator", "iterations", "gamma", "kappa", "cert_iters"],
    },
    AlgorithmInfo {
        id: "barycenter",
        module: "barycenter",
        summary: "decentralized stochastic Wasserstein barycenter",
        problem: "{network, measures, gamma}",
        params: &["m", "n", "pool", "gamma", "instance", "eps", "radius", "iterations", "residual_stop", "crn", "grid"],
    },
];

pub fn lookup(id: &str) -> Option<&'static AlgorithmInfo> {
    ALGORITHMS.iter().find(|a| a.id == id)
}

/// Typed access to the `params` object.
pub struct Params<'a>(pub &'a Map<String, Value>);

impl Params<'_> {
    fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key).filter(|v| !v.is_null())
    }

    fn bad(key: &str, want: &str) -> Error {
        Error::Config(format!("parameter `{key}` must be {want}"))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| v.as_f64().ok_or_else(|| Self::bad(key, "a number"))).transpose()
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key).map(|v| v.as_u64().ok_or_else(|| Self::bad(key, "a non-negative integer"))).transpose()
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.opt_u64(key)?.map(|v| v as usize).unwrap_or(default))
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        self.get(key).map(|v| v.as_bool().ok_or_else(|| Self::bad(key, "a boolean"))).transpose().map(|v| v.unwrap_or(default))
    }

    pub fn str(&self, key: &str, default: &str) -> Result<String> {
        self.get(key)
            .map(|v| v.as_str().map(String::from).ok_or_else(|| Self::bad(key, "a string")))
            .transpose()
            .map(|v| v.unwrap_or_else(|| default.into()))
    }
}

pub struct SeedOutput {
    pub trace: Trace,
    pub constants: BTreeMap<String, f64>,
}

fn out(trace: Trace, constants: &[(&str, f64)]) -> SeedOutput {
    SeedOutput { trace, constants: constants.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
}

#[derive(Deserialize)]
struct HyperplaneFile {
    c: Vec<f64>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
}

/// `c` from the problem file, else `n` uniform draws on `[−1, 2)` from the seed.
fn hyperplane_c(cfg: &ExperimentConfig, p: &Params, seed: u64) -> Result<Vec<f64>> {
    if let Some(path) = &cfg.problem {
        return Ok(read_json::<HyperplaneFile>(path)?.c);
    }
    let mut r = rng::stream(seed, 0);
    Ok((0..p.usize("n", 10)?).map(|_| r.random_range(-1.0..2.0)).collect())
}

/// `½ n s²` with `s = (Σc − 1)/n`, the optimal value of the projection.
fn hyperplane_fstar(c: &[f64]) -> f64 {
    let s = (c.iter().sum::<f64>() - 1.0) / c.len() as f64;
    0.5 * c.len() as f64 * s * s
}

/// Diagonal quadratic with `H₁₁ = l` and the rest uniform in `[0.01l, l)`.
fn sigm_quad(n: usize, l: f64, seed: u64) -> Quadratic<f64> {
    let mut r = rng::stream(seed, 0);
    let d: Vec<f64> = (0..n).map(|i| if i == 0 { l } else { l * r.random_range(0.01..1.0) }).collect();
    let xs: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    Quadratic::diagonal(&d, xs)
}

/// Diagonal quadratic with both `lmin` and `lmax` on the diagonal.
fn ardd_quad(n: usize, lmin: f64, lmax: f64, seed: u64) -> Quadratic<f64> {
    let mut r = rng::stream(seed, 0);
    let d: Vec<f64> = (0..n)
        .map(|i| if i == 0 { lmax } else if i == 1 { lmin } else { r.random_range(lmin..lmax) })
        .collect();
    let xs: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    Quadratic::diagonal(&d, xs)
}

fn dataset(cfg: &ExperimentConfig, p: &Params) -> Result<Dataset> {
    if let Some(path) = &cfg.problem {
        return Dataset::load(path);
    }
    pagerank::generate(&GenConfig {
        queries: p.usize("queries", 4)?,
        vertices: p.usize("vertices", 10)?,
        seed: p.opt_u64("instance")?.unwrap_or(0),
        ..GenConfig::default()
    })
}

fn transport(cfg: &ExperimentConfig, p: &Params, seed: u64) -> Result<ot::TransportInstance> {
    match &cfg.problem {
        Some(path) => ot::TransportInstance::load(path),
        None => Ok(ot::TransportInstance::random(p.usize("n", 8)?, seed)),
    }
}

fn ot_gamma(p: &Params, inst: &ot::TransportInstance, default_rel: f64) -> Result<f64> {
    match p.opt_f64("gamma")? {
        Some(g) => Ok(g),
        None => Ok(p.f64("gamma_rel", default_rel)? * inst.cost_inf()),
    }
}

/// The spec and its default horizon grid (one node for the matrix game).
fn game(cfg: &ExperimentConfig, p: &Params, default: &str) -> Result<(GameSpec, usize)> {
    if let Some(path) = &cfg.problem {
        return Ok((GameSpec::load(path)?, 16));
    }
    match p.str("game", default)?.as_str() {
        "rps" => Ok((games::rock_paper_scissors(), 1)),
        "lq" => Ok((games::lq_toy(false), 16)),
        "lq_strong" => Ok((games::lq_toy(true), 16)),
        g => Err(Error::Config(format!("unknown game `{g}` (rps, lq, lq_strong)"))),
    }
}

fn pd_out(run: pd::PdRun<f64>, extra: &[(&str, f64)]) -> SeedOutput {
    let mut o = out(run.trace, extra);
    o.constants.insert("iterations".into(), run.iterations as f64);
    o.constants.insert("converged".into(), if run.converged { 1.0 } else { 0.0 });
    o
}

/// Runs `cfg.algorithm` once with `seed`.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutput> {
    let p = Params(&cfg.params);
    match cfg.algorithm.as_str() {
        "apdagd" => {
            let c = hyperplane_c(cfg, &p, seed)?;
            let n = c.len() as f64;
            let prob = DenseProblem::<f64>::hyperplane_projection(c.clone());
            let mut o = ApdagdOptions::new(p.f64("l0", n)?, p.f64("eps_f", 0.0)?, p.f64("eps_eq", 0.0)?);
            o.max_iter = p.usize("max_iter", 1000)?;
            o.log_dense = p.usize("log_dense", usize::MAX)?;
            let r = DenseProblem::hyperplane_lambda_star(&c).abs();
            let run = pd::apdagd_run(&prob, &o)?;
            Ok(pd_out(run, &[("a_norm", prob.a_norm()), ("R", r), ("gamma", 1.0), ("L", n), ("f_star", hyperplane_fstar(&c))]))
        }
        "apdsgm" => {
            let c = hyperplane_c(cfg, &p, seed)?;
            let n = c.len() as f64;
            let r = DenseProblem::hyperplane_lambda_star(&c).abs();
            let sd = p.f64("sd", 0.1)?;
            let eps = p.f64("eps", 1e-3)?;
            let prob = NoisyDual::new(DenseProblem::hyperplane_projection(c), sd);
            let o = ApdsgmOptions { l: n, eps, iterations: p.usize("iterations", 500)?, seed, log_dense: p.usize("log_dense", usize::MAX)? };
            let run = pd::apdsgm_run(&prob, &o)?;
            Ok(pd_out(run, &[("L", n), ("R", r), ("eps", eps), ("sd", sd)]))
        }
        "pdugdsdr" => {
            let eps = p.f64("eps", 1e-6)?;
            let instance = p.str("instance", "hyperplane")?;
            // With zero slack the exact ray search solves a one-dimensional dual in one step and then stalls.
            let slack = p.f64("slack", if instance == "hyperplane" { 1e-8 } else { 0.0 })?;
            let o = PdugdsdrOptions { eps_f: eps, eps_eq: eps, slack, max_iter: p.usize("max_iter", 100_000)?, log_dense: p.usize("log_dense", usize::MAX)? };
            match instance.as_str() {
                "hyperplane" => {
                    let c = hyperplane_c(cfg, &p, seed)?;
                    let r = DenseProblem::hyperplane_lambda_star(&c).abs();
                    let prob = DenseProblem::<f64>::hyperplane_projection(c.clone());
                    let run = pd::pdugdsdr_run(&prob, &o)?;
                    let obj = prob.objective(&run.x_hat);
                    Ok(pd_out(run, &[("R", r), ("eps", eps), ("slack", slack), ("f_star", hyperplane_fstar(&c)), ("objective", obj)]))
                }
                "chain" => {
                    let prob = ChainProblem::<f64>::unit(p.usize("n", 500)?);
                    Ok(pd_out(pd::pdugdsdr_run(&prob, &o)?, &[("eps", eps), ("slack", slack)]))
                }
                s => Err(Error::Config(format!("unknown instance `{s}` (hyperplane, chain)"))),
            }
        }
        "sigm" => {
            let n = p.usize("n", 10)?;
            let f = Arc::new(sigm_quad(n, p.f64("l", 4.0)?, p.opt_u64("instance")?.unwrap_or(3)));
            let r = linalg::norm2(&f.xstar);
            let (sigma, pw) = (p.f64("sigma", 0.0)?, p.f64("p", 2.0)?);
            let mut o = StochasticDeltaLOracle::new(DeltaLOracle::exact(f.clone()), sigma, seed);
            let s = SigmSchedule::new(pw, f.lipschitz(), sigma, r)?;
            let mut opts = SigmOptions::new(p.usize("iterations", 1000)?);
            opts.phi_star = Some(0.0);
            opts.batch = p.usize("batch", 1)?;
            opts.log_dense = p.usize("log_dense", usize::MAX)?;
            let run = sigm::sigm_run(&mut o, Composite::Zero, &FeasibleSet::Full, &ProxSetup::euclidean(n), &s, &opts)?;
            Ok(out(run.trace, &[("L", f.lipschitz()), ("R", r), ("sigma", sigma), ("p", pw), ("C1", sigm::C1), ("C2", sigm::C2)]))
        }
        "sigm_restart" => {
            let n = p.usize("n", 6)?;
            let f = Arc::new(sigm_quad(n, p.f64("l", 3.0)?, p.opt_u64("instance")?.unwrap_or(8)));
            let sigma = p.f64("sigma", 0.0)?;
            let r0 = linalg::norm2(&f.xstar);
            let rc = RestartConfig {
                mu: f.strong_convexity(),
                r0,
                v: 1.0,
                delta: 0.0,
                p: 2.0,
                l: f.lipschitz(),
                sigma,
                lambda: 0.1,
                eps: None,
                x_star: Some(f.xstar.clone()),
            };
            let mut o = StochasticDeltaLOracle::new(DeltaLOracle::exact(f.clone()), sigma, seed);
            let run = sigm::sigm_restart_run(&mut o, Composite::Zero, &FeasibleSet::Full, &ProxSetup::euclidean(n), &rc, &vec![0.0; n], p.usize("outer", 8)?, Some(0.0))?;
            let mut t = Trace::new(&["stage", "dist_sq", "gap", "oracle_calls"]);
            for (u, row) in run.stages.iter().zip(&run.trace.rows) {
                t.push(vec![row[3], linalg::dist2(u, &f.xstar).powi(2), row[1], row[2]]);
            }
            Ok(out(t, &[("R0", r0), ("mu", f.strong_convexity()), ("L", f.lipschitz()), ("sigma", sigma)]))
        }
        "ardd" | "rdd" | "arddsc" => {
            let n = p.usize("n", 10)?;
            let (lmin, lmax) = (p.f64("lmin", 0.5)?, p.f64("lmax", 2.0)?);
            let f = Arc::new(ardd_quad(n, lmin, lmax, p.opt_u64("instance")?.unwrap_or(5)));
            let pw = p.usize("p", 2)? as u8;
            let mut ac = ArddConfig::new(pw, n, f.lipschitz())?;
            ac.theta = if pw == 1 { ardd::prox_for::<f64>(1, n)?.d(&f.xstar)? } else { 0.5 * linalg::norm2_sq(&f.xstar) };
            ac.sigma = p.f64("sigma", 0.0)?;
            let mut o = if ac.sigma > 0.0 { DirDerivOracle::new(f.clone(), ac.sigma, 0.0, 0.0, seed) } else { DirDerivOracle::noiseless(f.clone()) };
            let mut r = rng::stream(seed, 1);
            let x0 = vec![0.0; n];
            let consts = [("n", n as f64), ("L2", ac.l2), ("theta", ac.theta), ("rho", ac.rho_n), ("sigma", ac.sigma)];
            if cfg.algorithm == "arddsc" {
                ac.mu = f.strong_convexity();
                ac.r_p = linalg::norm2(&f.xstar);
                let run = ardd::arddsc_run(&mut o, &ac, &x0, p.usize("stages", 5)?, &mut r, Some(0.0))?;
                let mut o = out(run.trace, &consts);
                o.constants.insert("mu".into(), ac.mu);
                o.constants.insert("R".into(), ac.r_p);
                return Ok(o);
            }
            let variant = if cfg.algorithm == "ardd" { Variant::Ardd } else { Variant::Rdd };
            let (mut big_n, mut m) = (p.usize("iterations", 2000)?, p.usize("batch", 1)?);
            if let Some(eps) = p.opt_f64("eps")? {
                let pc = ardd::select_params(eps, &ac, variant)?;
                big_n = pc.iterations;
                m = pc.batch.unwrap_or(m);
            }
            let opts = RunOptions { f_star: Some(0.0), log_dense: p.usize("log_dense", usize::MAX)? };
            let run = if variant == Variant::Ardd {
                ardd::ardd_run(&mut o, &ac, &x0, big_n, m, &mut r, &opts)?
            } else {
                ardd::rdd_run(&mut o, &ac, &x0, big_n, m, &mut r, &opts)?
            };
            let mut o = out(run.trace, &consts);
            o.constants.insert("batch".into(), m as f64);
            Ok(o)
        }
        "adaptive_pg" => {
            let n = p.usize("n", 5)?;
            let l = p.f64("l", 8.0)?;
            let d: Vec<f64> = (0..n).map(|i| l * (i + 1) as f64 / n as f64).collect();
            let xs: Vec<f64> = (0..n).map(|i| 0.3 * (i as f64).cos()).collect();
            let f = Arc::new(Quadratic::diagonal(&d, xs));
            let l0 = p.f64("l0", l / 1024.0)?;
            let radius = p.f64("radius", 2.0)?;
            let set = FeasibleSet::Ball { center: vec![0.0; n], radius };
            let mut opts = AdaptivePgOptions::new(l0, p.f64("eps", 1e-8)?);
            opts.max_iter = p.usize("max_iter", 2000)?;
            let mut o = DeltaLOracle::exact(f);
            let run = pg::adaptive_pg_run(&mut o, &vec![radius / (n as f64).sqrt(); n], &set, &opts)?;
            let budget = pg::inner_step_budget(run.iterations, l, l0);
            let mut o = out(run.trace, &[("L", l), ("L0", l0), ("log_budget", (2.0 * l / l0).log2()), ("budget", budget)]);
            o.constants.insert("inner_total".into(), run.inner_steps as f64);
            o.constants.insert("iterations".into(), run.iterations as f64);
            Ok(o)
        }
        "pagerank_adaptive" => {
            let d = dataset(cfg, &p)?;
            let mut o = pagerank::PageRankOracle::new(&d);
            let set = FeasibleSet::Ball { center: d.phi_hat.clone(), radius: d.radius };
            let mut opts = AdaptivePgOptions::new(p.f64("l0", 1e-3)?, p.f64("eps", 1e-4)?);
            opts.max_iter = p.usize("max_iter", 100_000)?;
            let f0 = d.loss_exact(&d.phi_hat)?;
            let run = pg::adaptive_pg_run(&mut o, &d.phi_hat, &set, &opts)?;
            let f1 = d.loss_exact(&run.x)?;
            Ok(out(run.trace, &[("loss0", f0), ("loss", f1), ("radius", d.radius)]))
        }
        "pagerank_gfpgm" => {
            let d = dataset(cfg, &p)?;
            let m = d.dim();
            let (mut h, mut tau, mut steps) = (p.f64("h", 0.05)?, p.f64("tau", 1e-3)?, p.usize("steps", 200)?);
            let mut delta1 = p.f64("delta1", 1e-6)?;
            let mut note = None;
            if let Some(eps) = p.opt_f64("eps")? {
                let l = d.estimate_lipschitz(20, seed)?;
                let gp = GfpgmParams::for_accuracy(m, l, d.radius, eps)?;
                let cap = p.usize("max_steps", 20_000)?;
                if gp.steps > cap {
                    note = Some(format!("step count {} capped at {cap}", gp.steps));
                }
                (h, tau, steps, delta1) = (gp.h, gp.tau, gp.steps.min(cap), gp.delta);
            }
            // The loss is only defined near Φ; keep the probe points inside the 1.5R ball.
            let mut cap_note = None;
            if tau > 0.5 * d.radius {
                cap_note = Some(format!("smoothing radius {tau:e} capped at R/2"));
                tau = 0.5 * d.radius;
            }
            let mut v = pagerank::PageRankValue { data: &d, delta1 };
            let run = pg::gfpgm_run(&mut v, &d.phi_hat, &d.phi_hat, d.radius, h, tau, steps, seed)?;
            let mut t = run.trace;
            for n in note.into_iter().chain(cap_note) {
                t.note(n);
            }
            Ok(out(t, &[("loss0", d.loss_exact(&d.phi_hat)?), ("loss", d.loss_exact(&run.best)?), ("h", h), ("tau", tau), ("delta1", delta1)]))
        }
        "sinkhorn" => {
            let inst = transport(cfg, &p, seed)?;
            let gamma = ot_gamma(&p, &inst, 0.01)?;
            let tol = p.f64("tol", 1e-6)?;
            let run = ot::sinkhorn_run(&inst, gamma, p.usize("max_iter", 10_000)?, tol, p.bool("naive", false)?)?;
            let status = match run.status {
                ot::SinkhornStatus::Converged => 0.0,
                ot::SinkhornStatus::MaxIter => 1.0,
                ot::SinkhornStatus::NonFinite => 2.0,
            };
            Ok(out(run.trace, &[("gamma", gamma), ("cost_inf", inst.cost_inf()), ("tol", tol), ("status", status), ("residual", run.residual), ("iterations", run.iterations as f64)]))
        }
        "apdagd_ot" => {
            let inst = transport(cfg, &p, seed)?;
            let gamma = ot_gamma(&p, &inst, 0.01)?;
            let run = ot::apdagd_ot(&inst, gamma, p.usize("max_iter", 10_000)?, None)?;
            let res = ot::plan_residual(&run.plan, &inst.r, &inst.c);
            Ok(out(run.trace, &[("gamma", gamma), ("cost_inf", inst.cost_inf()), ("plan_residual", res)]))
        }
        "approx_ot" => {
            let inst = transport(cfg, &p, seed)?;
            let eps = match p.opt_f64("eps")? {
                Some(e) => e,
                None => p.f64("eps_rel", 0.05)? * inst.cost_inf(),
            };
            let run = ot::approx_ot(&inst, eps, p.usize("max_iter", ot::OT_MAX_ITER)?)?;
            let mut o = out(run.trace, &[("eps", eps), ("gamma", run.gamma), ("value", run.value), ("plan_residual", ot::plan_residual(&run.plan, &inst.r, &inst.c))]);
            if p.bool("lp", true)? {
                o.constants.insert("lp".into(), ot::lp_oracle_bruteforce(&inst)?.value);
            }
            Ok(o)
        }
        "sda" | "dualext" => {
            let sda = cfg.algorithm == "sda";
            let (spec, default_t) = game(cfg, &p, if sda { "rps" } else { "lq_strong" })?;
            let integ = match p.str("integrator", "rk4")?.as_str() {
                "rk4" => Integrator::Rk4,
                "euler" => Integrator::Euler,
                s => return Err(Error::Config(format!("unknown integrator `{s}`"))),
            };
            let g = games::discretize(&spec, p.usize("t", default_t)?, integ)?;
            let d = GameOptions::default();
            let opts = GameOptions {
                iterations: p.usize("iterations", d.iterations)?,
                gamma: p.f64("gamma", d.gamma)?,
                kappa: p.f64("kappa", d.kappa)?,
                cert_iters: p.usize("cert_iters", d.cert_iters)?,
                ..d
            };
            let run = if sda { games::sda_run(&g, &spec, &opts)? } else { games::dual_extrapolation_run(&g, &spec, &opts)? };
            Ok(out(run.trace, &[("D", run.d), ("L", run.l), ("G", run.g_max), ("gamma", opts.gamma)]))
        }
        "barycenter" => {
            let prob = match &cfg.problem {
                Some(path) => BarycenterProblem::load(path)?,
                None => barycenter::demo_problem(
                    p.usize("m", 3)?,
                    p.usize("n", 2)?,
                    p.usize("pool", 30)?,
                    p.f64("gamma", 0.1)?,
                    p.opt_u64("instance")?.unwrap_or(1),
                ),
            };
            let opts = BarycenterOptions {
                eps: p.f64("eps", 0.05)?,
                radius: p.opt_f64("radius")?,
                iterations: p.opt_u64("iterations")?.map(|v| v as usize),
                residual_stop: p.opt_f64("residual_stop")?,
                seed,
                common_random_numbers: p.bool("crn", false)?,
                log_dense: false,
            };
            let run = barycenter::barycenter_run(&prob, &opts)?;
            let objective = prob.objective(&run.p_hat, 0)?;
            let graph = prob.validate()?;
            let off_edge = run.ledger.iter().filter(|m| !graph.is_edge(m.from, m.to)).count();
            let mut o = out(
                run.trace,
                &[("eps", opts.eps), ("R", run.radius), ("L", run.lipschitz), ("final_objective", objective), ("consensus_final", run.consensus_residual), ("off_edge_messages", off_edge as f64)],
            );
            if p.bool("grid", false)? {
                o.constants.insert("grid_min".into(), grid_minimum(&prob)?);
            }
            Ok(o)
        }
        a => Err(Error::Config(format!("unknown algorithm `{a}`"))),
    }
}

/// Minimum of the objective over the consensus points `(t, 1 − t)`, `t` on a 1e-3 grid.
pub fn grid_minimum(prob: &BarycenterProblem) -> Result<f64> {
    if prob.n() != 2 {
        return Err(Error::Unsupported("grid minimum needs a two-point support".into()));
    }
    let pools: Vec<_> = prob.measures.iter().map(|m| m.eval_pool(0)).collect();
    let mut best = f64::INFINITY;
    for i in 0..=1000 {
        let t = i as f64 / 1000.0;
        let q = [t, 1.0 - t];
        let mut v = 0.0;
        for pool in &pools {
            v += barycenter::regularized_distance(pool, &q, prob.gamma)?;
        }
        best = best.min(v);
    }
    Ok(best)
}

fn bound(name: &str, metric: &str, rhs: &str, from_k: f64, target: BoundTarget) -> BoundSpec {
    BoundSpec { from_k, target, ..BoundSpec::new(name, metric, rhs) }
}

/// Rate-bound right-hand sides that apply to `algorithm` under `params`; empty when the
/// configuration falls outside the regime the bound covers.
pub fn default_bounds(algorithm: &str, params: &Map<String, Value>) -> Result<Vec<BoundSpec>> {
    let p = Params(params);
    let each = BoundTarget::Each;
    let mean = BoundTarget::Mean;
    Ok(match algorithm {
        "apdagd" => vec![
            bound("apdagd_gap", "gap", "16 * a_norm^2 * R^2 / (gamma * k^2)", 1.0, each),
            bound("apdagd_feasibility", "feasibility", "16 * a_norm^2 * R / (gamma * k^2)", 1.0, each),
        ],
        "pdugdsdr" if p.str("instance", "hyperplane")? == "hyperplane" => vec![
            bound("pdugdsdr_gap", "gap", "2 * R^2 / m_or_a + slack / 2", 1.0, each),
            bound("pdugdsdr_feasibility", "feasibility", "2 * R / m_or_a + slack / (2 * R)", 1.0, each),
        ],
        "sigm" => vec![bound("sigm_rate", "gap", "C1 * L * R^2 / k^p + C2 * sigma * R / math::sqrt(k)", 1.0, mean)],
        "sigm_restart" => vec![bound("restart_distance", "dist_sq", "R0^2 * math::exp(-stage)", 0.0, mean)],
        "ardd" if p.f64("sigma", 0.0)? == 0.0 => vec![bound("ardd_rate", "gap", "384 * theta * n^2 * rho * L2 / k^2", 1.0, mean)],
        "rdd" if p.f64("sigma", 0.0)? == 0.0 => vec![bound("rdd_rate", "gap", "384 * n * rho * L2 * theta / k", 1.0, mean)],
        "arddsc" => vec![bound("arddsc_stage", "gap", "bound", 1.0, mean)],
        "adaptive_pg" => vec![bound("inner_steps", "inner_steps", "k + 1 + log_budget", 0.0, each)],
        "sda" | "dualext" => vec![bound("certificate", "gap", "bound", 0.0, each)],
        "sinkhorn" => vec![BoundSpec { last: true, ..BoundSpec::new("sinkhorn_residual", "feasibility", "tol") }],
        "approx_ot" if p.bool("lp", true)? => vec![BoundSpec { last: true, ..BoundSpec::new("approx_ot_value", "cost", "lp + eps") }],
        _ => Vec::new(),
    })
}
