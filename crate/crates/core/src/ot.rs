//! Entropic optimal transport: dual oracle, Sinkhorn baseline, rounding onto `𝓤(r, c)`,
//! the APDAGD approximation pipeline and an exact LP oracle.

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp;
use crate::primal_dual::{self, ApdagdOptions, LinConstrainedProblem};
use crate::rng;
use crate::trace::{is_logged, Trace};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// OT instance; `cost` is row-major `n × n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportInstance {
    pub n: usize,
    #[serde(rename = "C")]
    pub cost: Vec<f64>,
    pub r: Vec<f64>,
    pub c: Vec<f64>,
}

const MARGINAL_TOL: f64 = 1e-9;

impl TransportInstance {
    pub fn new(n: usize, cost: Vec<f64>, r: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let inst = TransportInstance { n, cost, r, c };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || self.cost.len() != n * n || self.r.len() != n || self.c.len() != n {
            return Err(Error::InvalidInput(format!("instance dimensions do not match n = {n}")));
        }
        if self.cost.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("cost must be finite and nonnegative".into()));
        }
        for (name, m) in [("r", &self.r), ("c", &self.c)] {
            if m.iter().any(|v| !(*v >= 0.0)) || (linalg::sum(m) - 1.0).abs() > MARGINAL_TOL {
                return Err(Error::InvalidInput(format!("marginal {name} is not in the simplex")));
            }
        }
        Ok(())
    }

    pub fn cost_inf(&self) -> f64 {
        self.cost.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Uniform costs in `[0, 1]` and marginals from normalized uniforms in `[0.1, 1]`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut g = rng::stream(seed, 0);
        let cost = (0..n * n).map(|_| g.random_range(0.0..1.0)).collect();
        let marg = |g: &mut rng::StreamRng| {
            let v: Vec<f64> = (0..n).map(|_| g.random_range(0.1..1.0)).collect();
            let s = linalg::sum(&v);
            v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
        };
        let r = marg(&mut g);
        let c = marg(&mut g);
        TransportInstance { n, cost, r, c }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        let inst: TransportInstance = serde_json::from_str(&s).map_err(|e| Error::Config(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?)?;
        Ok(())
    }

    pub fn transport_cost(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.cost, x)
    }
}

/// `H(X) = −Σ X ln X` with `0 ln 0 = 0`.
pub fn entropy(x: &[f64]) -> f64 {
    -x.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

/// `⟨C, X⟩ − γH(X)`.
pub fn entropic_value(inst: &TransportInstance, gamma: f64, x: &[f64]) -> f64 {
    inst.transport_cost(x) - gamma * entropy(x)
}

pub fn row_sums(x: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| x[i * n..(i + 1) * n].iter().sum()).collect()
}

pub fn col_sums(x: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|j| (0..n).map(|i| x[i * n + j]).sum()).collect()
}

/// `‖X1 − r‖₁ + ‖Xᵀ1 − c‖₁`.
pub fn plan_residual(x: &[f64], r: &[f64], c: &[f64]) -> f64 {
    let n = r.len();
    linalg::norm1(&linalg::sub(&row_sums(x, n), r)) + linalg::norm1(&linalg::sub(&col_sums(x, n), c))
}

/// Regularized OT as `min {⟨C,X⟩ − γH(X) : X ∈ Δ^{n²}, AX = (r, c)}`; `λ = (y, z)`.
#[derive(Clone, Debug)]
pub struct EntropicOt {
    pub inst: TransportInstance,
    pub gamma: f64,
    b: Vec<f64>,
}

impl EntropicOt {
    pub fn new(inst: TransportInstance, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
        let b = inst.r.iter().chain(&inst.c).copied().collect();
        Ok(EntropicOt { inst, gamma, b })
    }

    /// `2/γ`, from `‖A‖_{1→2} = √2`.
    pub fn lipschitz(&self) -> f64 {
        2.0 / self.gamma
    }
}

impl LinConstrainedProblem<f64> for EntropicOt {
    fn primal_dim(&self) -> usize {
        self.inst.n * self.inst.n
    }
    fn dual_dim(&self) -> usize {
        2 * self.inst.n
    }
    fn objective(&self, x: &[f64]) -> f64 {
        entropic_value(&self.inst, self.gamma, x)
    }
    fn x_of(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let n = self.inst.n;
        let (y, z) = lambda.split_at(n);
        let w: Vec<f64> = (0..n * n).map(|k| -(self.inst.cost[k] + y[k / n] + z[k % n]) / self.gamma).collect();
        let x = linalg::softmax(&w);
        if !linalg::all_finite(&x) {
            return Err(Error::Oracle("non-finite plan in the dual oracle".into()));
        }
        Ok(x)
    }
    fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        let n = self.inst.n;
        let mut out = row_sums(x, n);
        out.extend(col_sums(x, n));
        out
    }
    fn b(&self) -> &[f64] {
        &self.b
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn a_norm(&self) -> f64 {
        std::f64::consts::SQRT_2
    }
}

/// Dual value, gradient and plan at `λ = (y, z)`.
pub fn entropic_dual_oracle(inst: &TransportInstance, gamma: f64, lambda: &[f64]) -> Result<primal_dual::DualEval<f64>> {
    primal_dual::dual_oracle(&EntropicOt::new(inst.clone(), gamma)?, lambda)
}

/// Rounds a nonnegative matrix onto `𝓤(r, c)`: row and column down-scaling, then a rank-one fill.
pub fn round_to_feasible(x: &[f64], r: &[f64], c: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut out = x.to_vec();
    let rows = row_sums(&out, n);
    for i in 0..n {
        let s = if rows[i] > r[i] { r[i] / rows[i] } else { 1.0 };
        for v in &mut out[i * n..(i + 1) * n] {
            *v *= s;
        }
    }
    let cols = col_sums(&out, n);
    for j in 0..n {
        let s = if cols[j] > c[j] { c[j] / cols[j] } else { 1.0 };
        for i in 0..n {
            out[i * n + j] *= s;
        }
    }
    let err_r: Vec<f64> = linalg::sub(r, &row_sums(&out, n)).into_iter().map(|v| v.max(0.0)).collect();
    let err_c: Vec<f64> = linalg::sub(c, &col_sums(&out, n)).into_iter().map(|v| v.max(0.0)).collect();
    let s = linalg::norm1(&err_r);
    if s > 0.0 {
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += err_r[i] * err_c[j] / s;
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinkhornStatus {
    Converged,
    MaxIter,
    NonFinite,
}

#[derive(Clone, Debug)]
pub struct SinkhornRun {
    pub plan: Vec<f64>,
    pub status: SinkhornStatus,
    pub iterations: usize,
    pub residual: f64,
    /// Columns: `k, dual, primal, cost, feasibility`.
    pub trace: Trace,
}

pub const OT_TRACE_COLS: [&str; 5] = ["k", "dual", "primal", "cost", "feasibility"];

/// Alternating marginal scaling. Log-domain unless `naive`, which uses `exp(−C/γ)` directly.
pub fn sinkhorn_run(inst: &TransportInstance, gamma: f64, max_iter: usize, tol: f64, naive: bool) -> Result<SinkhornRun> {
    let prob = EntropicOt::new(inst.clone(), gamma)?;
    let n = inst.n;
    let (r, c) = (&inst.r, &inst.c);
    let mut trace = Trace::new(&OT_TRACE_COLS);
    // Potentials f, g with X_ij = exp((f_i + g_j − C_ij)/γ); the naive path keeps u = e^{f/γ}, v = e^{g/γ}.
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let kmat: Vec<f64> = inst.cost.iter().map(|&v| (-v / gamma).exp()).collect();
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; n];
    let plan_of = |f: &[f64], g: &[f64], u: &[f64], v: &[f64]| -> Vec<f64> {
        (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if naive {
                    u[i] * kmat[k] * v[j]
                } else {
                    ((f[i] + g[j] - inst.cost[k]) / gamma).exp()
                }
            })
            .collect()
    };
    let mut status = SinkhornStatus::MaxIter;
    let mut residual = f64::INFINITY;
    let mut x = plan_of(&f, &g, &u, &v);
    let mut k = 0;
    while k < max_iter {
        k += 1;
        if naive {
            for i in 0..n {
                let kv: f64 = (0..n).map(|j| kmat[i * n + j] * v[j]).sum();
                u[i] = r[i] / kv;
            }
            for j in 0..n {
                let ku: f64 = (0..n).map(|i| kmat[i * n + j] * u[i]).sum();
                v[j] = c[j] / ku;
            }
        } else {
            for i in 0..n {
                let w: Vec<f64> = (0..n).map(|j| (g[j] - inst.cost[i * n + j]) / gamma).collect();
                f[i] = gamma * r[i].ln() - gamma * linalg::logsumexp(&w);
            }
            for j in 0..n {
                let w: Vec<f64> = (0..n).map(|i| (f[i] - inst.cost[i * n + j]) / gamma).collect();
                g[j] = gamma * c[j].ln() - gamma * linalg::logsumexp(&w);
            }
        }
        x = plan_of(&f, &g, &u, &v);
        if !linalg::all_finite(&x) || (naive && (!linalg::all_finite(&u) || !linalg::all_finite(&v))) {
            status = SinkhornStatus::NonFinite;
            residual = f64::NAN;
            break;
        }
        residual = plan_residual(&x, r, c);
        let done = residual <= tol;
        if is_logged(k, 10) || done || k == max_iter {
            let lam: Vec<f64> = if naive {
                u.iter().chain(&v).map(|&s| -gamma * s.ln()).collect()
            } else {
                f.iter().chain(&g).map(|&s| -s).collect()
            };
            let dual = primal_dual::dual_oracle(&prob, &lam).map(|e| e.phi).unwrap_or(f64::NAN);
            let rounded = round_to_feasible(&x, r, c);
            trace.push(vec![k as f64, dual, entropic_value(inst, gamma, &x), inst.transport_cost(&rounded), residual]);
        }
        if done {
            status = SinkhornStatus::Converged;
            break;
        }
    }
    Ok(SinkhornRun { plan: x, status, iterations: k, residual, trace })
}

#[derive(Clone, Debug)]
pub struct OtRun {
    /// Feasible plan in `𝓤(r, c)`.
    pub plan: Vec<f64>,
    pub value: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual iterate `η = (y, z)` at exit.
    pub eta: Vec<f64>,
    /// Columns: `k, dual, primal, cost, feasibility`.
    pub trace: Trace,
}

pub const OT_MAX_ITER: usize = 1_000_000;

/// `γ = ε/(3 ln n)`.
pub fn pipeline_gamma(eps: f64, n: usize) -> f64 {
    eps / (3.0 * (n as f64).ln())
}

/// APDAGD on the regularized problem, rounding each primal average; stops when
/// `⟨C, X̂ − X̂_k⟩ ≤ ε/6` and `f(x̂_k) + φ(η_k) ≤ ε/6`.
pub fn approx_ot(inst: &TransportInstance, eps: f64, max_iter: usize) -> Result<OtRun> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    if inst.n < 2 {
        return Err(Error::InvalidInput("the pipeline needs n ≥ 2".into()));
    }
    let gamma = pipeline_gamma(eps, inst.n);
    apdagd_ot(inst, gamma, max_iter, Some(eps / 6.0))
}

/// APDAGD on the regularized problem at a given `γ`. With `stop_eps = None` the run goes to `max_iter`.
pub fn apdagd_ot(inst: &TransportInstance, gamma: f64, max_iter: usize, stop_eps: Option<f64>) -> Result<OtRun> {
    let prob = EntropicOt::new(inst.clone(), gamma)?;
    let mut opts = ApdagdOptions::new(prob.lipschitz(), f64::NEG_INFINITY, f64::NEG_INFINITY);
    opts.max_iter = max_iter;
    let mut trace = Trace::new(&OT_TRACE_COLS);
    let mut plan = Vec::new();
    let mut value = f64::NAN;
    let run = primal_dual::apdagd_with_hook(&prob, &opts, |k, x_hat, _eta, gap| {
        plan = round_to_feasible(x_hat, &inst.r, &inst.c);
        value = inst.transport_cost(&plan);
        let shift = value - inst.transport_cost(x_hat);
        let done = stop_eps.is_some_and(|e| shift <= e && gap <= e);
        if is_logged(k, 10) || done || k == max_iter {
            let primal = prob.objective(x_hat);
            trace.push(vec![k as f64, gap - primal, primal, value, primal_dual::residual(&prob, x_hat)]);
        }
        done
    })?;
    Ok(OtRun { plan, value, gamma, iterations: run.iterations, converged: run.converged, eta: run.eta, trace })
}

/// Exact OT value from the rational transportation simplex.
#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub value: f64,
    pub exact: BigRational,
    pub plan: Vec<f64>,
}

pub const LP_MAX_N: usize = 8;

fn rational(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::InvalidInput(format!("non-finite value {v}")))
}

/// Marginals converted exactly and renormalized to sum to one in rational arithmetic.
fn exact_marginal(m: &[f64]) -> Result<Vec<BigRational>> {
    let q: Vec<BigRational> = m.iter().map(|&v| rational(v)).collect::<Result<_>>()?;
    let s = q.iter().fold(BigRational::zero(), |a, b| a + b);
    Ok(q.into_iter().map(|v| v / s.clone()).collect())
}

/// Exact optimum of the unregularized problem for `n ≤ 8`.
pub fn lp_oracle_bruteforce(inst: &TransportInstance) -> Result<LpOutcome> {
    lp_oracle_with(inst, false)
}

/// Same optimum by enumerating every spanning-tree basis (`n ≤ 4`).
pub fn lp_oracle_enumerate(inst: &TransportInstance) -> Result<LpOutcome> {
    lp_oracle_with(inst, true)
}

fn lp_oracle_with(inst: &TransportInstance, enumerate: bool) -> Result<LpOutcome> {
    if inst.n > LP_MAX_N {
        return Err(Error::Unsupported(format!("LP oracle supports n ≤ {LP_MAX_N}")));
    }
    let cost: Vec<BigRational> = inst.cost.iter().map(|&v| rational(v)).collect::<Result<_>>()?;
    let r = exact_marginal(&inst.r)?;
    let c = exact_marginal(&inst.c)?;
    let sol = if enumerate { lp::transport_enumerate(&cost, &r, &c)? } else { lp::transport_simplex(&cost, &r, &c)? };
    let to_f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
    Ok(LpOutcome { value: to_f(&sol.value), plan: sol.plan.iter().map(to_f).collect(), exact: sol.value })
}
