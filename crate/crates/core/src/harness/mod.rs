//! Experiment harness: JSON configs, seeded runs, per-seed and aggregate CSV traces,
//! and a JSON report of bound verdicts.

mod bounds;
mod registry;

pub use bounds::{check_bound, parse_rhs, BoundSpec, BoundTarget, Verdict};
pub use registry::{default_bounds, grid_minimum, lookup, run_seed, AlgorithmInfo, Params, SeedOutput, ALGORITHMS};

use crate::error::{Error, Result};
use crate::trace::Trace;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Relative output directories are resolved against this variable when it is set.
pub const OUTPUT_ROOT_ENV: &str = "IXOPT_OUTPUT_ROOT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Names the output subdirectory.
    pub id: String,
    pub module: String,
    #[serde(default)]
    pub problem: Option<PathBuf>,
    pub algorithm: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub bounds: Vec<BoundSpec>,
    /// Per-bound tolerance overrides, keyed by bound name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn new(id: &str, algorithm: &str, seeds: Vec<u64>) -> Result<Self> {
        let info = lookup(algorithm).ok_or_else(|| Error::Config(format!("unknown algorithm `{algorithm}`")))?;
        Ok(ExperimentConfig {
            id: id.into(),
            module: info.module.into(),
            problem: None,
            algorithm: algorithm.into(),
            params: Map::new(),
            seeds,
            output_dir: None,
            bounds: Vec::new(),
            tolerances: BTreeMap::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        // Problem paths are relative to the config file.
        if let (Some(p), Some(dir)) = (&cfg.problem, path.parent()) {
            if p.is_relative() {
                cfg.problem = Some(dir.join(p));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let info = lookup(&self.algorithm).ok_or_else(|| Error::Config(format!("unknown algorithm `{}`", self.algorithm)))?;
        if info.module != self.module {
            return Err(Error::Config(format!("algorithm `{}` belongs to module `{}`, not `{}`", self.algorithm, info.module, self.module)));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id == ".." {
            return Err(Error::Config(format!("id `{}` is not a plain directory name", self.id)));
        }
        for k in self.params.keys() {
            if !info.params.contains(&k.as_str()) {
                return Err(Error::Config(format!("`{}` takes no parameter `{k}` (known: {})", self.algorithm, info.params.join(", "))));
            }
        }
        if let Some(p) = &self.problem {
            if !p.is_file() {
                return Err(Error::Config(format!("problem file {} does not exist", p.display())));
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for b in &self.bounds {
            if !names.insert(&b.name) {
                return Err(Error::Config(format!("duplicate bound name `{}`", b.name)));
            }
            parse_rhs(&b.rhs)?;
        }
        for k in self.tolerances.keys() {
            if !names.contains(k) {
                return Err(Error::Config(format!("tolerance override for unknown bound `{k}`")));
            }
        }
        Ok(())
    }

    /// `<output_dir or "runs">/<id>`, with relative paths under `$IXOPT_OUTPUT_ROOT` when set.
    pub fn output_path(&self) -> PathBuf {
        let base = self.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs"));
        let base = match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if base.is_relative() => PathBuf::from(root).join(base),
            _ => base,
        };
        base.join(&self.id)
    }

    fn bound_with_tolerance(&self, b: &BoundSpec) -> BoundSpec {
        let mut b = b.clone();
        if let Some(t) = self.tolerances.get(&b.name) {
            b.tolerance = *t;
        }
        b
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedReport {
    pub seed: u64,
    pub status: SeedStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// File name inside the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    pub rows: usize,
    pub constants: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub verdicts: Vec<Verdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub id: String,
    pub module: String,
    pub algorithm: String,
    pub params: Map<String, Value>,
    pub seeds: Vec<SeedReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<String>,
    /// One verdict per bound: worst case over seeds, or on the seed mean.
    pub verdicts: Vec<Verdict>,
    /// All seeds ran and every verdict passed.
    pub pass: bool,
    #[serde(skip)]
    pub dir: PathBuf,
}

impl Report {
    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

fn json_num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(crate::trace::format_value(v)))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs every seed, fanned out over the available cores; results come back in seed order.
fn run_all(cfg: &ExperimentConfig) -> Vec<Result<SeedOutput>> {
    let width = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut results = Vec::with_capacity(cfg.seeds.len());
    for chunk in cfg.seeds.chunks(width) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|&seed| s.spawn(move || run_seed(cfg, seed))).collect();
            for h in handles {
                results.push(h.join().unwrap_or_else(|_| Err(Error::Oracle("seed run panicked".into()))));
            }
        });
    }
    results
}

/// Mean and sample standard deviation per `k` (first column) over the given traces, in seed order.
pub fn aggregate(traces: &[&Trace]) -> Result<Trace> {
    let Some(first) = traces.first() else {
        return Err(Error::InvalidInput("nothing to aggregate".into()));
    };
    if traces.iter().any(|t| t.columns != first.columns) {
        return Err(Error::InvalidInput("traces disagree on columns".into()));
    }
    let mut cols = vec![first.columns[0].clone(), "seeds".to_string()];
    for c in &first.columns[1..] {
        cols.push(format!("{c}_mean"));
        cols.push(format!("{c}_std"));
    }
    let mut ks: Vec<f64> = traces.iter().flat_map(|t| t.rows.iter().map(|r| r[0])).collect();
    ks.sort_by(|a, b| a.total_cmp(b));
    ks.dedup();
    let mut out = Trace { columns: cols, rows: Vec::new(), notes: Vec::new() };
    for k in ks {
        let rows: Vec<&Vec<f64>> = traces.iter().filter_map(|t| t.rows.iter().find(|r| r[0] == k)).collect();
        let n = rows.len() as f64;
        let mut row = vec![k, n];
        for j in 1..first.columns.len() {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = if rows.len() > 1 { rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            row.push(mean);
            row.push(var.sqrt());
        }
        out.rows.push(row);
    }
    Ok(out)
}

/// The `_mean` columns of an aggregate under the original names.
fn mean_view(agg: &Trace) -> Trace {
    let keep: Vec<usize> = std::iter::once(0).chain((0..agg.columns.len()).filter(|&j| agg.columns[j].ends_with("_mean"))).collect();
    Trace {
        columns: keep.iter().map(|&j| agg.columns[j].trim_end_matches("_mean").to_string()).collect(),
        rows: agg.rows.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect(),
        notes: Vec::new(),
    }
}

/// Constants visible to bound expressions: numeric params, then run-derived values.
fn constants_for(cfg: &ExperimentConfig, seed: u64, run: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let mut c: BTreeMap<String, f64> = cfg.params.iter().filter_map(|(k, v)| v.as_f64().map(|x| (k.clone(), x))).collect();
    c.insert("seed".into(), seed as f64);
    c.extend(run.iter().map(|(k, v)| (k.clone(), *v)));
    c
}

/// Validates, runs every seed, writes `seed_<s>.csv`, `aggregate.csv` and `report.json`
/// under [`ExperimentConfig::output_path`], and returns the report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let dir = cfg.output_path();
    std::fs::create_dir_all(&dir)?;
    let results = run_all(cfg);
    let mut seeds = Vec::with_capacity(results.len());
    let mut ok: Vec<(u64, SeedOutput)> = Vec::new();
    for (&seed, res) in cfg.seeds.iter().zip(results) {
        match res {
            Ok(o) => {
                let name = format!("seed_{seed}.csv");
                let csv = o.trace.to_csv_string();
                std::fs::write(dir.join(&name), &csv)?;
                let consts = constants_for(cfg, seed, &o.constants);
                let mut verdicts = Vec::new();
                for b in cfg.bounds.iter().filter(|b| b.target == BoundTarget::Each) {
                    verdicts.push(check_bound(&o.trace, &cfg.bound_with_tolerance(b), &consts)?);
                }
                seeds.push(SeedReport {
                    seed,
                    status: SeedStatus::Ok,
                    error: None,
                    trace: Some(name),
                    sha256: Some(sha256_hex(csv.as_bytes())),
                    rows: o.trace.len(),
                    constants: o.constants.iter().map(|(k, v)| (k.clone(), json_num(*v))).collect(),
                    notes: o.trace.notes.clone(),
                    verdicts,
                });
                ok.push((seed, o));
            }
            Err(e) => seeds.push(SeedReport {
                seed,
                status: SeedStatus::Failed,
                error: Some(e.to_string()),
                trace: None,
                sha256: None,
                rows: 0,
                constants: BTreeMap::new(),
                notes: Vec::new(),
                verdicts: Vec::new(),
            }),
        }
    }
    let traces: Vec<&Trace> = ok.iter().map(|(_, o)| &o.trace).collect();
    let agg = if traces.is_empty() { None } else { Some(aggregate(&traces)?) };
    if let Some(a) = &agg {
        a.save(&dir.join("aggregate.csv"))?;
    }
    let mut verdicts = Vec::new();
    for b in &cfg.bounds {
        let b = cfg.bound_with_tolerance(b);
        let v = match (b.target, &agg) {
            (BoundTarget::Mean, Some(a)) => {
                // Constants that differ between seeds are averaged as well.
                let mut consts = BTreeMap::new();
                for (seed, o) in &ok {
                    for (k, v) in constants_for(cfg, *seed, &o.constants) {
                        *consts.entry(k).or_insert(0.0) += v / ok.len() as f64;
                    }
                }
                check_bound(&mean_view(a), &b, &consts)?
            }
            (BoundTarget::Each, _) => {
                let per: Vec<(u64, &Verdict)> =
                    seeds.iter().filter_map(|s| s.verdicts.iter().find(|v| v.name == b.name).map(|v| (s.seed, v))).collect();
                let worst = per.iter().max_by(|a, b| a.1.max_margin.total_cmp(&b.1.max_margin));
                Verdict {
                    name: b.name.clone(),
                    metric: b.metric.clone(),
                    rhs: b.rhs.clone(),
                    pass: !per.is_empty() && per.iter().all(|(_, v)| v.pass),
                    max_margin: worst.map_or(f64::NAN, |w| w.1.max_margin),
                    worst_k: worst.and_then(|w| w.1.worst_k),
                    worst_seed: worst.map(|w| w.0),
                    rows: per.iter().map(|(_, v)| v.rows).sum(),
                    tolerance: b.tolerance,
                }
            }
            (BoundTarget::Mean, None) => Verdict {
                name: b.name.clone(),
                metric: b.metric.clone(),
                rhs: b.rhs.clone(),
                pass: false,
                max_margin: f64::NAN,
                worst_k: None,
                worst_seed: None,
                rows: 0,
                tolerance: b.tolerance,
            },
        };
        verdicts.push(v);
    }
    let pass = seeds.iter().all(|s| matches!(s.status, SeedStatus::Ok)) && verdicts.iter().all(|v| v.pass);
    let report = Report {
        id: cfg.id.clone(),
        module: cfg.module.clone(),
        algorithm: cfg.algorithm.clone(),
        params: cfg.params.clone(),
        seeds,
        aggregate: agg.map(|_| "aggregate.csv".to_string()),
        verdicts,
        pass,
        dir: dir.clone(),
    };
    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    std::fs::write(dir.join("report.json"), body)?;
    Ok(report)
}

/// A bound file holds one spec or a list of them.
pub fn load_bounds(path: &Path) -> Result<Vec<BoundSpec>> {
    let v: Value = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
    if v.is_array() {
        Ok(serde_json::from_value(v)?)
    } else {
        Ok(vec![serde_json::from_value(v)?])
    }
}
