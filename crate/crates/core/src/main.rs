//! `ixopt` command line: experiment runner, bound checker and per-module shortcuts.
//!
//! Exit codes: 0 every verdict passed, 1 some verdict failed, 2 execution error.

use clap::{Args, Parser, Subcommand};
use ixopt::harness::{self, BoundSpec, ExperimentConfig, Report};
use ixopt::pagerank::{self, GenConfig};
use ixopt::trace::{format_value, Trace};
use ixopt::{Error, Result};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ixopt", version, about = "Inexact-oracle and primal-dual methods with rate-bound checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory (relative paths go under $IXOPT_OUTPUT_ROOT when set).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra algorithm parameter, `key=value` with a JSON value.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Experiment id, used as the output subdirectory.
    #[arg(long)]
    id: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment config and write traces plus a report.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check bounds from a JSON file against a CSV trace.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        bound: PathBuf,
        /// Constant available to the bound expression, `name=value`.
        #[arg(long = "const", value_name = "NAME=VALUE")]
        consts: Vec<String>,
    },
    /// List algorithm ids, their modules and parameters.
    ListAlgorithms,
    /// Supervised PageRank datasets and training.
    Pagerank {
        #[command(subcommand)]
        cmd: PagerankCmd,
    },
    /// Random directional derivative methods on a quadratic.
    ArddBench {
        #[arg(long, default_value = "ardd")]
        variant: String,
        #[arg(long, default_value_t = 2)]
        p: u8,
        #[arg(long)]
        eps: Option<f64>,
        /// Seed count (0..n) or a comma-separated list.
        #[arg(long, default_value = "1")]
        seeds: String,
        #[command(flatten)]
        common: Common,
    },
    /// Primal-dual solvers on the hyperplane projection.
    Pd {
        #[arg(long, default_value = "apdagd")]
        solver: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Problem file `{"c": [...]}`.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal transport.
    Ot {
        #[command(subcommand)]
        cmd: OtCmd,
    },
    /// Decentralized barycenters.
    Barycenter {
        #[command(subcommand)]
        cmd: BarycenterCmd,
    },
    /// Discretized differential games.
    Games {
        #[arg(long, default_value = "sda")]
        method: String,
        #[arg(long = "T", default_value_t = 16)]
        t: usize,
        /// rps, lq or lq_strong (ignored with --problem).
        #[arg(long)]
        game: Option<String>,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        iterations: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum PagerankCmd {
    /// Generate a synthetic dataset.
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        queries: usize,
        #[arg(long, default_value_t = 10)]
        vertices: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train the ranking parameters.
    Train {
        #[arg(long, default_value = "adaptive")]
        method: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dataset file; generated from the seed when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum OtCmd {
    /// Solve one instance.
    Solve {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "apdagd")]
        method: String,
        /// Disable log-domain stabilization (sinkhorn only).
        #[arg(long)]
        naive: bool,
        /// Regularization for sinkhorn; defaults to ε/(3 ln n).
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum BarycenterCmd {
    /// Run the distributed method.
    Run {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_kv(s: &str) -> Result<(String, &str)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("expected key=value, got `{s}`")))?;
    Ok((k.trim().to_string(), v.trim()))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = |_| Error::Config(format!("bad seed list `{s}`"));
    if s.contains(',') {
        return s.split(',').map(|t| t.trim().parse().map_err(bad)).collect();
    }
    let n: u64 = s.trim().parse().map_err(bad)?;
    Ok((0..n).collect())
}

/// Builds a config for a shortcut command, with the algorithm's default bounds.
fn shortcut(algorithm: &str, seeds: Vec<u64>, problem: Option<PathBuf>, mut params: Map<String, Value>, common: &Common) -> Result<ExperimentConfig> {
    for s in &common.params {
        let (k, v) = parse_kv(s)?;
        let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        params.insert(k, v);
    }
    let mut cfg = ExperimentConfig::new(common.id.as_deref().unwrap_or(algorithm), algorithm, seeds)?;
    cfg.problem = problem;
    cfg.bounds = harness::default_bounds(algorithm, &params)?;
    cfg.params = params;
    cfg.output_dir = common.out.clone();
    Ok(cfg)
}

fn summarize(report: &Report) {
    println!("{} [{}] -> {}", report.id, report.algorithm, report.dir.display());
    for s in &report.seeds {
        match &s.error {
            Some(e) => println!("  seed {}: FAILED {e}", s.seed),
            None => println!("  seed {}: {} rows, sha256 {}", s.seed, s.rows, s.sha256.as_deref().unwrap_or("")),
        }
    }
    for v in &report.verdicts {
        println!(
            "  {} {}: {} <= {} (max margin {}, worst k {})",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.metric,
            v.rhs,
            format_value(v.max_margin),
            v.worst_k.map_or("-".into(), format_value)
        );
    }
}

fn run_cfg(cfg: &ExperimentConfig) -> Result<bool> {
    let report = harness::run_experiment(cfg)?;
    summarize(&report);
    Ok(report.pass)
}

fn obj(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn exec(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Run { config } => run_cfg(&ExperimentConfig::load(&config)?),
        Cmd::Check { trace, bound, consts } => {
            let t = Trace::load(&trace)?;
            let mut c = BTreeMap::new();
            for s in &consts {
                let (k, v) = parse_kv(s)?;
                c.insert(k, v.parse::<f64>().map_err(|_| Error::Config(format!("constant `{s}` is not a number")))?);
            }
            let specs: Vec<BoundSpec> = harness::load_bounds(&bound)?;
            let verdicts = specs.iter().map(|b| harness::check_bound(&t, b, &c)).collect::<Result<Vec<_>>>()?;
            println!("{}", serde_json::to_string_pretty(&verdicts)?);
            Ok(verdicts.iter().all(|v| v.pass))
        }
        Cmd::ListAlgorithms => {
            for a in harness::ALGORITHMS {
                println!("{:<18} {:<12} {}", a.id, a.module, a.summary);
                println!("{:<18} problem: {}; params: {}", "", a.problem, a.params.join(", "));
            }
            Ok(true)
        }
        Cmd::Pagerank { cmd: PagerankCmd::Gen { out, queries, vertices, seed } } => {
            let d = pagerank::generate(&GenConfig { queries, vertices, seed, ..GenConfig::default() })?;
            d.save(&out)?;
            println!("wrote {} queries to {}", d.queries.len(), out.display());
            Ok(true)
        }
        Cmd::Pagerank { cmd: PagerankCmd::Train { method, eps, seed, data, common } } => {
            let alg = match method.as_str() {
                "gfpgm" => "pagerank_gfpgm",
                "adaptive" => "pagerank_adaptive",
                m => return Err(Error::Config(format!("unknown method `{m}` (gfpgm, adaptive)"))),
            };
            let mut params = obj(&[("eps", eps.into())]);
            if data.is_none() {
                params.insert("instance".into(), seed.into());
            }
            run_cfg(&shortcut(alg, vec![seed], data, params, &common)?)
        }
        Cmd::ArddBench { variant, p, eps, seeds, common } => {
            let mut params = obj(&[("p", p.into())]);
            if let Some(e) = eps {
                params.insert("eps".into(), e.into());
            }
            run_cfg(&shortcut(&variant.to_ascii_lowercase(), parse_seeds(&seeds)?, None, params, &common)?)
        }
        Cmd::Pd { solver, seed, problem, common } => run_cfg(&shortcut(&solver, vec![seed], problem, Map::new(), &common)?),
        Cmd::Ot { cmd: OtCmd::Solve { eps, method, naive, gamma, instance, n, seed, common } } => {
            let mut params = obj(&[("n", n.into())]);
            let alg = match method.as_str() {
                "apdagd" => {
                    params.insert("eps".into(), eps.into());
                    "approx_ot"
                }
                "sinkhorn" => {
                    let g = gamma.unwrap_or_else(|| ixopt::ot::pipeline_gamma(eps, n));
                    params.insert("gamma".into(), g.into());
                    params.insert("naive".into(), naive.into());
                    "sinkhorn"
                }
                m => return Err(Error::Config(format!("unknown method `{m}` (apdagd, sinkhorn)"))),
            };
            if instance.is_some() {
                params.remove("n");
            }
            run_cfg(&shortcut(alg, vec![seed], instance, params, &common)?)
        }
        Cmd::Barycenter { cmd: BarycenterCmd::Run { eps, seed, radius, problem, common } } => {
            let mut params = obj(&[("eps", eps.into())]);
            if let Some(r) = radius {
                params.insert("radius".into(), r.into());
            }
            run_cfg(&shortcut("barycenter", vec![seed], problem, params, &common)?)
        }
        Cmd::Games { method, t, game, problem, iterations, common } => {
            let alg = match method.as_str() {
                "sda" | "dualext" => method.as_str(),
                m => return Err(Error::Config(format!("unknown method `{m}` (sda, dualext)"))),
            };
            let mut params = obj(&[("t", t.into())]);
            if let Some(g) = game {
                params.insert("game".into(), g.into());
            }
            if let Some(i) = iterations {
                params.insert("iterations".into(), i.into());
            }
            run_cfg(&shortcut(alg, vec![0], problem, params, &common)?)
        }
    }
}

fn main() -> ExitCode {
    match exec(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
