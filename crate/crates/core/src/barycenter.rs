//! Decentralized entropic Wasserstein barycenter on a simulated agent network.
//!
//! Agents hold semi-discrete measures, sample from them, and run the accelerated
//! stochastic primal-dual method in the variables `λ̄ = √W λ`, exchanging one gradient
//! message per neighbor per round.

use crate::error::{Error, Result};
use crate::linalg::{self, logsumexp, Mat};
use crate::rng::{self, StreamRng};
use crate::trace::Trace;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Undirected network with its Laplacian `W̄`.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    pub m: usize,
    pub edges: Vec<(usize, usize)>,
    pub laplacian: Mat<f64>,
    pub neighbors: Vec<Vec<usize>>,
    /// `λ_max(W̄) = λ_max(W̄ ⊗ I_n)`.
    pub lambda_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub m: usize,
    pub edges: Vec<(usize, usize)>,
}

impl NetworkGraph {
    pub fn laplacian(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("network without agents".into()));
        }
        let mut w = Mat::zeros(m, m);
        let mut neighbors = vec![Vec::new(); m];
        let mut list = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at agent {i}")));
            }
            if i >= m || j >= m {
                return Err(Error::InvalidInput(format!("edge ({i}, {j}) outside 0..{m}")));
            }
            if w[(i, j)] != 0.0 {
                return Err(Error::InvalidInput(format!("duplicate edge ({i}, {j})")));
            }
            w[(i, j)] = -1.0;
            w[(j, i)] = -1.0;
            w[(i, i)] += 1.0;
            w[(j, j)] += 1.0;
            neighbors[i].push(j);
            neighbors[j].push(i);
            list.push((i.min(j), i.max(j)));
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        let eig = w.sym_eigenvalues();
        let lambda_max = eig.iter().cloned().fold(0.0, f64::max);
        if eig.iter().any(|&e| e < -1e-9 * lambda_max.max(1.0)) {
            return Err(Error::InvalidInput("Laplacian is not positive semidefinite".into()));
        }
        Ok(NetworkGraph { m, edges: list, laplacian: w, neighbors, lambda_max })
    }

    pub fn from_spec(spec: &NetworkSpec) -> Result<Self> {
        Self::laplacian(spec.m, &spec.edges)
    }

    pub fn path(m: usize) -> Self {
        let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        Self::laplacian(m, &edges).expect("path graph")
    }

    pub fn cycle(m: usize) -> Self {
        let mut edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        if m > 2 {
            edges.push((m - 1, 0));
        }
        Self::laplacian(m, &edges).expect("cycle graph")
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors.get(i).is_some_and(|nb| nb.binary_search(&j).is_ok())
    }

    pub fn connected(&self) -> bool {
        let mut seen = vec![false; self.m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `pᵀWp = Σ_{(i,j)∈E} ‖p_i − p_j‖²` for stacked blocks.
    pub fn consensus_residual(&self, blocks: &[Vec<f64>]) -> f64 {
        self.edges.iter().map(|&(i, j)| linalg::norm2_sq(&linalg::sub(&blocks[i], &blocks[j]))).sum()
    }

    /// `[W x]_i = Σ_j W̄_ij x_j` for stacked blocks.
    pub fn apply(&self, blocks: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|i| {
                let mut out = linalg::scale(self.neighbors[i].len() as f64, &blocks[i]);
                for &j in &self.neighbors[i] {
                    linalg::axpy(-1.0, &blocks[j], &mut out);
                }
                out
            })
            .collect()
    }
}

/// How an agent draws points `Y` and the cost rows `c_l(Y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMeasure {
    /// Uniform over a finite pool given by its cost rows.
    Pool { costs: Vec<Vec<f64>> },
    /// Gaussian `N(mean, std² I)` with squared Euclidean cost to the support points.
    Gaussian { mean: Vec<f64>, std: f64, support: Vec<Vec<f64>> },
}

/// Size of the fixed evaluation sample standing in for a Gaussian measure.
pub const EVAL_POOL: usize = 2000;

impl AgentMeasure {
    pub fn n(&self) -> usize {
        match self {
            AgentMeasure::Pool { costs } => costs.first().map_or(0, |r| r.len()),
            AgentMeasure::Gaussian { support, .. } => support.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidInput("measure with empty support".into()));
        }
        match self {
            AgentMeasure::Pool { costs } => {
                if costs.iter().any(|r| r.len() != n || r.iter().any(|&c| !(c.is_finite() && c >= 0.0))) {
                    return Err(Error::InvalidInput("pool costs must be finite, nonnegative and rectangular".into()));
                }
            }
            AgentMeasure::Gaussian { mean, std, support } => {
                if !(*std >= 0.0) || support.iter().any(|z| z.len() != mean.len()) {
                    return Err(Error::InvalidInput("malformed Gaussian measure".into()));
                }
            }
        }
        Ok(())
    }

    /// Cost row of one sampled point.
    pub fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        match self {
            AgentMeasure::Pool { costs } => costs[rng.random_range(0..costs.len())].clone(),
            AgentMeasure::Gaussian { mean, std, support } => {
                let y: Vec<f64> = mean.iter().map(|&m| m + std * rng::normal(rng)).collect();
                support.iter().map(|z| linalg::norm2_sq(&linalg::sub(z, &y))).collect()
            }
        }
    }

    /// Cost rows defining the measure for evaluation: the pool itself, or a fixed sample.
    pub fn eval_pool(&self, seed: u64) -> Vec<Vec<f64>> {
        match self {
            AgentMeasure::Pool { costs } => costs.clone(),
            AgentMeasure::Gaussian { .. } => {
                let mut r = rng::stream(seed, u64::MAX);
                (0..EVAL_POOL).map(|_| self.sample(&mut r)).collect()
            }
        }
    }
}

/// `softmax((λ − c)/γ)`.
pub fn softmax_point(lambda: &[f64], costs: &[f64], gamma: f64) -> Vec<f64> {
    let z: Vec<f64> = lambda.iter().zip(costs).map(|(l, c)| (l - c) / gamma).collect();
    linalg::softmax(&z)
}

/// Mini-batch estimate of `∇𝒲*_{γ,μ}(λ̄)`, the average of `M` softmax points.
pub fn agent_stoch_grad(measure: &AgentMeasure, lambda: &[f64], batch: usize, gamma: f64, rng: &mut StreamRng) -> Vec<f64> {
    let mut g = vec![0.0; lambda.len()];
    for _ in 0..batch {
        let p = softmax_point(lambda, &measure.sample(rng), gamma);
        linalg::axpy(1.0, &p, &mut g);
    }
    linalg::scale(1.0 / batch.max(1) as f64, &g)
}

/// `𝒲*(λ) = (1/s) Σ_s γ[lse((λ − c_s)/γ) + log s]` over a pool of cost rows.
pub fn conjugate_value(pool: &[Vec<f64>], lambda: &[f64], gamma: f64) -> f64 {
    let s = pool.len() as f64;
    pool.iter()
        .map(|c| {
            let z: Vec<f64> = lambda.iter().zip(c).map(|(l, c)| (l - c) / gamma).collect();
            gamma * (logsumexp(&z) + s.ln())
        })
        .sum::<f64>()
        / s
}

/// `∇𝒲*(λ)`: the pool average of the softmax points.
pub fn conjugate_grad(pool: &[Vec<f64>], lambda: &[f64], gamma: f64) -> Vec<f64> {
    let mut g = vec![0.0; lambda.len()];
    for c in pool {
        linalg::axpy(1.0, &softmax_point(lambda, c, gamma), &mut g);
    }
    linalg::scale(1.0 / pool.len() as f64, &g)
}

/// `𝒲_γ(μ, p) = min_π ⟨C, π⟩ + γ Σ π log π` over plans with rows `1/s` and columns `p`,
/// by log-domain Sinkhorn. Returns the value of the final column-feasible plan.
pub fn regularized_distance(pool: &[Vec<f64>], p: &[f64], gamma: f64) -> Result<f64> {
    let s = pool.len();
    let n = p.len();
    if s == 0 || pool.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("pool does not match the support".into()));
    }
    if p.iter().any(|&x| x < 0.0) || (linalg::sum(p) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("barycenter weights off the simplex".into()));
    }
    let lq = -(s as f64).ln();
    let lp: Vec<f64> = p.iter().map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY }).collect();
    let mut f = vec![0.0; s];
    let mut g = vec![0.0; n];
    let active: Vec<usize> = (0..n).filter(|&l| p[l] > 0.0).collect();
    let plan = |f: &[f64], g: &[f64], i: usize, l: usize| ((f[i] + g[l] - pool[i][l]) / gamma).exp();
    for it in 0..100_000 {
        for i in 0..s {
            let z: Vec<f64> = active.iter().map(|&l| (g[l] - pool[i][l]) / gamma).collect();
            f[i] = gamma * (lq - logsumexp(&z));
        }
        for &l in &active {
            let z: Vec<f64> = (0..s).map(|i| (f[i] - pool[i][l]) / gamma).collect();
            g[l] = gamma * (lp[l] - logsumexp(&z));
        }
        if it % 10 == 0 {
            let err: f64 = (0..s).map(|i| (active.iter().map(|&l| plan(&f, &g, i, l)).sum::<f64>() - 1.0 / s as f64).abs()).sum();
            if err < 1e-13 {
                break;
            }
        }
    }
    let mut val = 0.0;
    for i in 0..s {
        for &l in &active {
            let x = plan(&f, &g, i, l);
            if x > 0.0 {
                val += x * pool[i][l] + gamma * x * x.ln();
            }
        }
    }
    Ok(val)
}

/// Network, agent measures and the regularization `γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycenterProblem {
    pub network: NetworkSpec,
    pub measures: Vec<AgentMeasure>,
    pub gamma: f64,
}

impl BarycenterProblem {
    pub fn n(&self) -> usize {
        self.measures.first().map_or(0, |m| m.n())
    }

    pub fn validate(&self) -> Result<NetworkGraph> {
        let g = NetworkGraph::from_spec(&self.network)?;
        if self.measures.len() != g.m {
            return Err(Error::InvalidInput("one measure per agent required".into()));
        }
        for m in &self.measures {
            m.validate()?;
            if m.n() != self.n() {
                return Err(Error::InvalidInput("agents disagree on the support size".into()));
            }
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParameter("γ must be positive".into()));
        }
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let p: BarycenterProblem = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        p.validate()?;
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        serde_json::to_writer_pretty(std::fs::File::create(path)?, self)?;
        Ok(())
    }

    /// `Σ_i 𝒲_{γ,μ_i}(p_i)` on the evaluation pools.
    pub fn objective(&self, blocks: &[Vec<f64>], seed: u64) -> Result<f64> {
        self.measures.iter().zip(blocks).map(|(m, p)| regularized_distance(&m.eval_pool(seed), p, self.gamma)).sum()
    }

    /// `n ‖c‖_∞ / γ` over the evaluation pools.
    pub fn default_radius(&self, seed: u64) -> f64 {
        let cmax = self.measures.iter().flat_map(|m| m.eval_pool(seed)).flatten().fold(0.0, f64::max);
        self.n() as f64 * cmax / self.gamma
    }
}

/// Path network of `m` agents on a line; agent `i` holds a pool of `pool` points drawn from
/// `N(center_i, 0.3²)` with centers spread over `[0.1, 0.9]`, support `n` points in `[0, 1]`,
/// squared distance costs.
pub fn demo_problem(m: usize, n: usize, pool: usize, gamma: f64, seed: u64) -> BarycenterProblem {
    let support: Vec<f64> = (0..n).map(|l| if n == 1 { 0.5 } else { l as f64 / (n - 1) as f64 }).collect();
    let measures = (0..m)
        .map(|i| {
            let center = if m == 1 { 0.5 } else { 0.1 + 0.8 * i as f64 / (m - 1) as f64 };
            let mut r = rng::stream(seed, 1000 + i as u64);
            let costs = (0..pool)
                .map(|_| {
                    let y = center + 0.3 * rng::normal(&mut r);
                    support.iter().map(|z| (z - y).powi(2)).collect()
                })
                .collect();
            AgentMeasure::Pool { costs }
        })
        .collect();
    BarycenterProblem { network: NetworkSpec { m, edges: (1..m).map(|i| (i - 1, i)).collect() }, measures, gamma }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BarycenterOptions {
    pub eps: f64,
    /// Dual radius estimate; `None` uses [`BarycenterProblem::default_radius`].
    pub radius: Option<f64>,
    /// Overrides `N = √(16 λ_max R²/(εγ))`.
    pub iterations: Option<usize>,
    /// Stop once `p̂ᵀWp̂` drops below this value.
    pub residual_stop: Option<f64>,
    pub seed: u64,
    /// All agents draw from one random stream (same samples for identical measures).
    pub common_random_numbers: bool,
    /// Evaluate the objective-based columns every iteration instead of a geometric subset.
    pub log_dense: bool,
}

impl Default for BarycenterOptions {
    fn default() -> Self {
        BarycenterOptions { eps: 0.05, radius: None, iterations: None, residual_stop: None, seed: 0, common_random_numbers: false, log_dense: false }
    }
}

/// `α_{k+1}`: the largest root of `C_k + α = 2Lα²`.
pub fn alpha_next(c_k: f64, l: f64) -> f64 {
    (1.0 + (1.0 + 8.0 * l * c_k).sqrt()) / (4.0 * l)
}

/// `M_{k+1} = max{1, λ_max C_{k+1}/(L α_{k+1} ε)}`, rounded up.
pub fn batch_size(lambda_max: f64, c_next: f64, l: f64, alpha: f64, eps: f64) -> usize {
    let m = lambda_max * c_next / (l * alpha * eps);
    if m > 1.0 {
        m.ceil() as usize
    } else {
        1
    }
}

/// `N = ⌈√(16 λ_max R²/(εγ))⌉`.
pub fn iteration_count(lambda_max: f64, radius: f64, eps: f64, gamma: f64) -> usize {
    (16.0 * lambda_max * radius * radius / (eps * gamma)).sqrt().ceil() as usize
}

/// One message `from → to` in round `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Message {
    pub round: usize,
    pub from: usize,
    pub to: usize,
}

/// In-process message passing restricted to graph edges.
#[derive(Debug)]
pub struct Network<'a> {
    graph: &'a NetworkGraph,
    inbox: Vec<Vec<(usize, Vec<f64>)>>,
    pub ledger: Vec<Message>,
}

impl<'a> Network<'a> {
    pub fn new(graph: &'a NetworkGraph) -> Self {
        Network { graph, inbox: vec![Vec::new(); graph.m], ledger: Vec::new() }
    }

    pub fn send(&mut self, round: usize, from: usize, to: usize, payload: Vec<f64>) -> Result<()> {
        if !self.graph.is_edge(from, to) {
            return Err(Error::InvalidInput(format!("agent {from} cannot reach agent {to}")));
        }
        self.ledger.push(Message { round, from, to });
        self.inbox[to].push((from, payload));
        Ok(())
    }

    /// Drains the messages addressed to `agent`, sorted by sender.
    pub fn receive(&mut self, agent: usize) -> Vec<(usize, Vec<f64>)> {
        let mut msgs = std::mem::take(&mut self.inbox[agent]);
        msgs.sort_by_key(|m| m.0);
        msgs
    }
}

/// Local state of one agent.
#[derive(Clone, Debug)]
pub struct AgentState {
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub p_hat: Vec<f64>,
    rng: StreamRng,
}

#[derive(Clone, Debug)]
pub struct BarycenterRun {
    /// Final `[p̂_N]_i`.
    pub p_hat: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
    pub iterations: usize,
    pub radius: f64,
    pub lipschitz: f64,
    pub samples: u64,
    pub ledger: Vec<Message>,
    pub consensus_residual: f64,
    /// Columns `k, gap_proxy, consensus, objective, messages, samples, batch`.
    pub trace: Trace,
}

/// Runs the distributed method in lockstep rounds; agents only see their own measure and
/// the messages of their neighbors.
pub fn barycenter_run(problem: &BarycenterProblem, opts: &BarycenterOptions) -> Result<BarycenterRun> {
    let graph = problem.validate()?;
    if !graph.connected() {
        return Err(Error::InvalidInput("network must be connected".into()));
    }
    if !(opts.eps > 0.0) {
        return Err(Error::InvalidParameter("ε must be positive".into()));
    }
    let n = problem.n();
    let gamma = problem.gamma;
    let radius = opts.radius.unwrap_or_else(|| problem.default_radius(opts.seed));
    // A single agent has W = 0; the step rule then uses L = 1/γ.
    let l = graph.lambda_max.max(1.0) / gamma;
    let big_n = opts.iterations.unwrap_or_else(|| iteration_count(graph.lambda_max, radius, opts.eps, gamma));
    let pools: Vec<Vec<Vec<f64>>> = problem.measures.iter().map(|m| m.eval_pool(opts.seed)).collect();
    let mut agents: Vec<AgentState> = (0..graph.m)
        .map(|i| AgentState {
            lambda: vec![0.0; n],
            eta: vec![0.0; n],
            zeta: vec![0.0; n],
            p_hat: vec![0.0; n],
            rng: rng::stream(opts.seed, if opts.common_random_numbers { 0 } else { i as u64 }),
        })
        .collect();
    let mut net = Network::new(&graph);
    let mut trace = Trace::new(&["k", "gap_proxy", "consensus", "objective", "messages", "samples", "batch"]);
    trace.note(format!(
        "N = {big_n}, R = {radius:e}, L = {l:e}, n λ_max R²/ε² = {:e}, √(λ_max R²/(εγ)) = {:e}",
        n as f64 * graph.lambda_max * radius * radius / (opts.eps * opts.eps),
        (graph.lambda_max * radius * radius / (opts.eps * gamma)).sqrt()
    ));
    let logs: Vec<usize> = {
        let mut v = Vec::new();
        let mut k = 1usize;
        while k < big_n {
            v.push(k);
            k = (k + 1).max((k as f64 * 1.25) as usize);
        }
        v.push(big_n);
        v
    };
    let mut li = 0;
    let mut c = 0.0;
    let mut samples = 0u64;
    let mut done = 0;
    for k in 0..big_n {
        let alpha = alpha_next(c, l);
        let c_next = c + alpha;
        let tau = alpha / c_next;
        let batch = batch_size(graph.lambda_max, c_next, l, alpha, opts.eps);
        let mut grads = Vec::with_capacity(graph.m);
        for (i, a) in agents.iter_mut().enumerate() {
            a.lambda = linalg::lincomb(tau, &a.zeta, 1.0 - tau, &a.eta);
            let g = agent_stoch_grad(&problem.measures[i], &a.lambda, batch, gamma, &mut a.rng);
            samples += batch as u64;
            for &j in &graph.neighbors[i] {
                net.send(k, i, j, g.clone())?;
            }
            grads.push(g);
        }
        for (i, a) in agents.iter_mut().enumerate() {
            let mut wg = linalg::scale(graph.neighbors[i].len() as f64, &grads[i]);
            for (_, msg) in net.receive(i) {
                linalg::axpy(-1.0, &msg, &mut wg);
            }
            linalg::axpy(-alpha, &wg, &mut a.zeta);
            a.eta = linalg::lincomb(tau, &a.zeta, 1.0 - tau, &a.eta);
            a.p_hat = linalg::lincomb(tau, &grads[i], 1.0 - tau, &a.p_hat);
        }
        c = c_next;
        done = k + 1;
        let blocks: Vec<Vec<f64>> = agents.iter().map(|a| a.p_hat.clone()).collect();
        let cons = graph.consensus_residual(&blocks);
        let stop = opts.residual_stop.is_some_and(|t| cons <= t);
        if opts.log_dense || (li < logs.len() && logs[li] == done) || stop {
            if li < logs.len() && logs[li] == done {
                li += 1;
            }
            let obj = problem.objective(&blocks, opts.seed)?;
            let dual: f64 = agents.iter().zip(&pools).map(|(a, p)| conjugate_value(p, &a.eta, gamma)).sum();
            trace.push(vec![done as f64, obj + dual, cons, obj, net.ledger.len() as f64, samples as f64, batch as f64]);
        }
        if stop {
            break;
        }
    }
    let p_hat: Vec<Vec<f64>> = agents.iter().map(|a| a.p_hat.clone()).collect();
    let consensus_residual = graph.consensus_residual(&p_hat);
    Ok(BarycenterRun {
        eta: agents.iter().map(|a| a.eta.clone()).collect(),
        p_hat,
        iterations: done,
        radius,
        lipschitz: l,
        samples,
        ledger: net.ledger,
        consensus_residual,
        trace,
    })
}
