//! Supervised PageRank: parametric restart and transition probabilities, truncated
//! series for the stationary distribution and its derivative, the square pairwise
//! ranking loss and its inexact oracles.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::pg::InexactOracle;
use crate::prox::project_ball;
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One query graph. `edge_features[e]` belongs to `edges[e]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryGraph {
    pub edges: Vec<(usize, usize)>,
    pub node_features: Vec<Vec<f64>>,
    pub edge_features: Vec<Vec<f64>>,
    pub seed_set: Vec<usize>,
    /// Relevance label per vertex, `0` for unjudged, larger is more relevant.
    pub relevance_labels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub alpha: f64,
    pub phi_hat: Vec<f64>,
    pub radius: f64,
    pub queries: Vec<QueryGraph>,
}

/// Sparse assessor matrix: row `(hi, lo)` has `−1` at `hi` and `+1` at `lo`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssessorMatrix {
    pub p: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl AssessorMatrix {
    /// All pairs with strictly different positive labels.
    pub fn from_labels(labels: &[u32]) -> Self {
        let mut pairs = Vec::new();
        for (i, &a) in labels.iter().enumerate() {
            for (j, &b) in labels.iter().enumerate() {
                if a > 0 && b > 0 && a > b {
                    pairs.push((i, j));
                }
            }
        }
        AssessorMatrix { p: labels.len(), pairs }
    }

    pub fn rows(&self) -> usize {
        self.pairs.len()
    }

    pub fn apply(&self, pi: &[f64]) -> Vec<f64> {
        self.pairs.iter().map(|&(h, l)| pi[l] - pi[h]).collect()
    }

    pub fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (&(h, l), &v) in self.pairs.iter().zip(y) {
            out[h] -= v;
            out[l] += v;
        }
        out
    }

    pub fn dense(&self) -> Mat<f64> {
        let mut a = Mat::zeros(self.pairs.len(), self.p);
        for (r, &(h, l)) in self.pairs.iter().enumerate() {
            a[(r, h)] = -1.0;
            a[(r, l)] = 1.0;
        }
        a
    }
}

impl QueryGraph {
    pub fn vertices(&self) -> usize {
        self.node_features.len()
    }

    pub fn m1(&self) -> usize {
        self.node_features.first().map_or(0, |v| v.len())
    }

    pub fn m2(&self) -> usize {
        self.edge_features.first().map_or(0, |v| v.len())
    }

    pub fn assessor(&self) -> AssessorMatrix {
        AssessorMatrix::from_labels(&self.relevance_labels)
    }

    pub fn validate(&self, m1: usize, m2: usize) -> Result<()> {
        let p = self.vertices();
        if p == 0 {
            return Err(Error::InvalidInput("query graph without vertices".into()));
        }
        if self.edges.len() != self.edge_features.len() {
            return Err(Error::InvalidInput("one feature vector per edge required".into()));
        }
        if self.relevance_labels.len() != p {
            return Err(Error::InvalidInput("one relevance label per vertex required".into()));
        }
        if self.seed_set.is_empty() || self.seed_set.iter().any(|&u| u >= p) {
            return Err(Error::InvalidInput("seed set must be a nonempty set of vertices".into()));
        }
        if self.edges.iter().any(|&(i, j)| i >= p || j >= p) {
            return Err(Error::InvalidInput("edge endpoint out of range".into()));
        }
        let ok = |v: &Vec<f64>, m: usize| v.len() == m && v.iter().all(|x| x.is_finite() && *x >= 0.0);
        if !self.node_features.iter().all(|v| ok(v, m1)) || !self.edge_features.iter().all(|v| ok(v, m2)) {
            return Err(Error::InvalidInput("features must be finite, nonnegative and of equal length".into()));
        }
        Ok(())
    }

    fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices()];
        for (e, &(i, _)) in self.edges.iter().enumerate() {
            out[i].push(e);
        }
        out
    }
}

/// Restart vector and transition matrix of one query at fixed `φ`.
#[derive(Clone, Debug)]
pub struct Chain {
    pub alpha: f64,
    pub p: usize,
    pub m1: usize,
    pub m2: usize,
    pub pi0: Vec<f64>,
    /// Seed-set normalizer `Σ_{l∈U} ⟨φ₁, V_l⟩`.
    pub s0: f64,
    /// Per vertex: `(edge index, target, probability)`, empty for dangling vertices.
    pub rows: Vec<Vec<(usize, usize, f64)>>,
    /// Per vertex `Σ_l ⟨φ₂, E_il⟩`.
    pub s: Vec<f64>,
}

impl Chain {
    pub fn new(g: &QueryGraph, phi: &[f64], alpha: f64) -> Result<Self> {
        let (m1, m2) = (g.m1(), g.m2());
        g.validate(m1, m2)?;
        if phi.len() != m1 + m2 {
            return Err(Error::InvalidInput(format!("φ has length {}, expected {}", phi.len(), m1 + m2)));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter("damping must lie in (0, 1)".into()));
        }
        let (phi1, phi2) = phi.split_at(m1);
        let p = g.vertices();
        let mut pi0 = vec![0.0; p];
        let mut s0 = 0.0;
        let mut seen = vec![false; p];
        for &u in &g.seed_set {
            if seen[u] {
                continue;
            }
            seen[u] = true;
            pi0[u] = linalg::dot(phi1, &g.node_features[u]);
            s0 += pi0[u];
        }
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(Error::InvalidParameter("restart normalizer is not positive".into()));
        }
        pi0.iter_mut().for_each(|v| *v /= s0);
        let out = g.out_edges();
        let mut rows = Vec::with_capacity(p);
        let mut s = vec![0.0; p];
        for (i, es) in out.iter().enumerate() {
            if es.is_empty() {
                rows.push(Vec::new());
                continue;
            }
            let w: Vec<f64> = es.iter().map(|&e| linalg::dot(phi2, &g.edge_features[e])).collect();
            s[i] = w.iter().sum();
            if !(s[i] > 0.0) || !s[i].is_finite() {
                return Err(Error::InvalidParameter(format!("transition normalizer of vertex {i} is not positive")));
            }
            rows.push(es.iter().zip(&w).map(|(&e, &wi)| (e, g.edges[e].1, wi / s[i])).collect());
        }
        Ok(Chain { alpha, p, m1, m2, pi0, s0, rows, s })
    }

    /// `Pᵀ x`, dangling rows replaced by the restart vector.
    pub fn step(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.p];
        let mut dangling = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                dangling += x[i];
            } else {
                for &(_, j, pij) in row {
                    y[j] += pij * x[i];
                }
            }
        }
        if dangling != 0.0 {
            linalg::axpy(dangling, &self.pi0, &mut y);
        }
        y
    }

    /// Dense `P` (rows sum to one).
    pub fn transition(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.p, self.p);
        for (i, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                for j in 0..self.p {
                    m[(i, j)] = self.pi0[j];
                }
            } else {
                for &(_, j, pij) in row {
                    m[(i, j)] += pij;
                }
            }
        }
        m
    }

    /// `π̃(φ, N) = α/(1 − (1−α)^{N+1}) Σ_{k≤N} (1−α)^k π_k`.
    pub fn stationary_approx(&self, n: usize) -> Vec<f64> {
        let q = 1.0 - self.alpha;
        let mut pk = self.pi0.clone();
        let mut acc = pk.clone();
        let mut w = 1.0;
        for _ in 0..n {
            pk = self.step(&pk);
            w *= q;
            linalg::axpy(w, &pk, &mut acc);
        }
        let c = self.alpha / (1.0 - q.powi(n as i32 + 1));
        acc.iter().map(|v| v * c).collect()
    }

    /// Solves `(I − (1−α)Pᵀ) π = α π⁰`.
    pub fn stationary_exact(&self) -> Result<Vec<f64>> {
        let pt = self.transition().transpose();
        let sys = Mat::from_fn(self.p, self.p, |i, j| (i == j) as u8 as f64 - (1.0 - self.alpha) * pt[(i, j)]);
        sys.solve(&linalg::scale(self.alpha, &self.pi0))
    }

    /// `dπ⁰/dφᵀ` (`p × m`, only the `φ₁` block is nonzero).
    pub fn d_pi0(&self, g: &QueryGraph) -> Mat<f64> {
        let m = self.m1 + self.m2;
        let mut d = Mat::zeros(self.p, m);
        let mut wsum = vec![0.0; self.m1];
        let mut seen = vec![false; self.p];
        let mut seeds = Vec::new();
        for &u in &g.seed_set {
            if !seen[u] {
                seen[u] = true;
                seeds.push(u);
                linalg::axpy(1.0, &g.node_features[u], &mut wsum);
            }
        }
        for &u in &seeds {
            for a in 0..self.m1 {
                d[(u, a)] = g.node_features[u][a] / self.s0 - self.pi0[u] * wsum[a] / self.s0;
            }
        }
        d
    }

    /// `Σ_i (dp_i/dφᵀ) xᵢ` where `p_i` is row `i` of `P`.
    pub fn d_rows_weighted(&self, g: &QueryGraph, d_pi0: &Mat<f64>, x: &[f64]) -> Mat<f64> {
        let m = self.m1 + self.m2;
        let mut d = Mat::zeros(self.p, m);
        let mut dangling = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                dangling += x[i];
                continue;
            }
            let mut esum = vec![0.0; self.m2];
            for &(e, _, _) in row {
                linalg::axpy(1.0, &g.edge_features[e], &mut esum);
            }
            for &(e, j, pij) in row {
                for b in 0..self.m2 {
                    let v = g.edge_features[e][b] / self.s[i] - pij * esum[b] / self.s[i];
                    d[(j, self.m1 + b)] += x[i] * v;
                }
            }
        }
        if dangling != 0.0 {
            for j in 0..self.p {
                for a in 0..self.m1 {
                    d[(j, a)] += dangling * d_pi0[(j, a)];
                }
            }
        }
        d
    }

    /// `Π₀ = α dπ⁰ + (1−α) Σ_i dp_i πᵢ`.
    pub fn pi_zero(&self, g: &QueryGraph, pi: &[f64]) -> Mat<f64> {
        let d0 = self.d_pi0(g);
        let dr = self.d_rows_weighted(g, &d0, pi);
        d0.scaled(self.alpha).add(&dr.scaled(1.0 - self.alpha))
    }

    /// `Π̃(φ, N₂) = 1/(1 − (1−α)^{N₂+1}) Σ_{k≤N₂} (1−α)^k Π_k` seeded with `Π₀` built from `π̃(φ, N₁)`.
    pub fn derivative_approx(&self, g: &QueryGraph, n1: usize, n2: usize) -> (Vec<f64>, Mat<f64>) {
        let pi = self.stationary_approx(n1);
        let pi0 = self.pi_zero(g, &pi);
        let q = 1.0 - self.alpha;
        let m = pi0.cols;
        let mut out = Mat::zeros(self.p, m);
        for c in 0..m {
            let mut col = pi0.col(c);
            let mut acc = col.clone();
            let mut w = 1.0;
            for _ in 0..n2 {
                col = self.step(&col);
                w *= q;
                linalg::axpy(w, &col, &mut acc);
            }
            for (r, v) in acc.into_iter().enumerate() {
                out[(r, c)] = v / (1.0 - q.powi(n2 as i32 + 1));
            }
        }
        (pi, out)
    }

    /// `dπ/dφᵀ = (I − (1−α)Pᵀ)⁻¹ Π₀(π)` with the exact `π`.
    pub fn derivative_exact(&self, g: &QueryGraph) -> Result<(Vec<f64>, Mat<f64>)> {
        let pi = self.stationary_exact()?;
        let rhs = self.pi_zero(g, &pi);
        let pt = self.transition().transpose();
        let sys = Mat::from_fn(self.p, self.p, |i, j| (i == j) as u8 as f64 - (1.0 - self.alpha) * pt[(i, j)]);
        let mut d = Mat::zeros(self.p, rhs.cols);
        for c in 0..rhs.cols {
            let col = sys.solve(&rhs.col(c))?;
            for (r, v) in col.into_iter().enumerate() {
                d[(r, c)] = v;
            }
        }
        Ok((pi, d))
    }
}

/// `π̃_q(φ, N)` for one query.
pub fn stationary_approx(g: &QueryGraph, phi: &[f64], alpha: f64, n: usize) -> Result<Vec<f64>> {
    Ok(Chain::new(g, phi, alpha)?.stationary_approx(n))
}

/// Stationary distribution by a dense linear solve.
pub fn stationary_exact(g: &QueryGraph, phi: &[f64], alpha: f64) -> Result<Vec<f64>> {
    Chain::new(g, phi, alpha)?.stationary_exact()
}

/// `‖(A π)₊‖₂²`.
pub fn pair_loss(a: &AssessorMatrix, pi: &[f64]) -> f64 {
    a.apply(pi).iter().map(|v| v.max(0.0).powi(2)).sum()
}

/// `N = ⌈(1/α) ln(8r/δ₁)⌉ − 1`, clamped at zero.
pub fn n_loss(alpha: f64, r: usize, delta1: f64) -> usize {
    truncation(alpha, 8.0 * r as f64 / delta1)
}

/// `(N₁, N₂)` for the gradient oracle.
pub fn n_grad(alpha: f64, r: usize, beta1: f64, delta2: f64) -> (usize, usize) {
    let base = beta1 * r as f64 / (alpha * delta2);
    (truncation(alpha, 24.0 * base), truncation(alpha, 8.0 * base))
}

fn truncation(alpha: f64, arg: f64) -> usize {
    if !(arg > 1.0) {
        return 0;
    }
    let n = (arg.ln() / alpha).ceil() - 1.0;
    if n <= 0.0 {
        0
    } else {
        n as usize
    }
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.phi_hat.len()
    }

    pub fn m1(&self) -> usize {
        self.queries.first().map_or(0, |q| q.m1())
    }

    pub fn validate(&self) -> Result<()> {
        if self.queries.is_empty() {
            return Err(Error::InvalidInput("dataset without queries".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter("damping must lie in (0, 1)".into()));
        }
        if !(self.radius > 0.0) || self.phi_hat.iter().any(|&v| v - self.radius <= 0.0) {
            return Err(Error::InvalidParameter("the ball Φ must lie in the positive orthant".into()));
        }
        let (m1, m2) = (self.m1(), self.queries[0].m2());
        if m1 + m2 != self.dim() {
            return Err(Error::InvalidInput("φ̂ length differs from the feature dimensions".into()));
        }
        self.queries.iter().try_for_each(|q| q.validate(m1, m2))
    }

    /// `r = max_q r_q`.
    pub fn max_pairs(&self) -> usize {
        self.queries.iter().map(|q| q.assessor().rows()).max().unwrap_or(0)
    }

    pub fn project(&self, phi: &[f64]) -> Vec<f64> {
        project_ball(phi, &self.phi_hat, self.radius)
    }

    /// `f̃(φ, δ₁)`.
    pub fn loss_approx(&self, phi: &[f64], delta1: f64) -> Result<f64> {
        if !(delta1 > 0.0) {
            return Err(Error::InvalidParameter("δ₁ must be positive".into()));
        }
        let n = n_loss(self.alpha, self.max_pairs(), delta1);
        self.loss_with(phi, |c| Ok(c.stationary_approx(n)))
    }

    /// `f(φ)` with linear-solve stationary distributions.
    pub fn loss_exact(&self, phi: &[f64]) -> Result<f64> {
        self.loss_with(phi, |c| c.stationary_exact())
    }

    fn loss_with(&self, phi: &[f64], mut pi: impl FnMut(&Chain) -> Result<Vec<f64>>) -> Result<f64> {
        let mut total = 0.0;
        for q in &self.queries {
            let chain = Chain::new(q, phi, self.alpha)?;
            total += pair_loss(&q.assessor(), &pi(&chain)?);
        }
        Ok(total / self.queries.len() as f64)
    }

    /// `g̃(φ, δ₂)`.
    pub fn grad_approx(&self, phi: &[f64], delta2: f64) -> Result<Vec<f64>> {
        if !(delta2 > 0.0) {
            return Err(Error::InvalidParameter("δ₂ must be positive".into()));
        }
        let (n1, n2) = n_grad(self.alpha, self.max_pairs(), self.beta1()?, delta2);
        self.grad_with(phi, |c, q| Ok(c.derivative_approx(q, n1, n2)))
    }

    /// `∇f(φ)` from the linear-solve stationary distribution and derivative.
    pub fn grad_exact(&self, phi: &[f64]) -> Result<Vec<f64>> {
        self.grad_with(phi, |c, q| c.derivative_exact(q))
    }

    fn grad_with(&self, phi: &[f64], mut deriv: impl FnMut(&Chain, &QueryGraph) -> Result<(Vec<f64>, Mat<f64>)>) -> Result<Vec<f64>> {
        let mut g = vec![0.0; phi.len()];
        for q in &self.queries {
            let chain = Chain::new(q, phi, self.alpha)?;
            let (pi, d) = deriv(&chain, q)?;
            let a = q.assessor();
            let res: Vec<f64> = a.apply(&pi).into_iter().map(|v| v.max(0.0)).collect();
            linalg::axpy(1.0, &d.tmatvec(&a.apply_t(&res)), &mut g);
        }
        let c = 2.0 / self.queries.len() as f64;
        Ok(linalg::scale(c, &g))
    }

    /// Upper bound `β₁` on `α‖dπ⁰/dφᵀ‖₁ + (1−α)Σ_i‖dp_i/dφᵀ‖₁` over `Φ`.
    ///
    /// Each column of `d(w/⟨φ,Σw⟩)/dφᵀ` has ℓ1 norm at most `2 W_a / S`, with `W_a` the
    /// summed feature `a` and `S ≥ ⟨φ̂, W⟩ − R‖W‖₂` on the ball.
    pub fn beta1(&self) -> Result<f64> {
        let (m1, r) = (self.m1(), self.radius);
        let (hat1, hat2) = self.phi_hat.split_at(m1);
        let ratio = |w: &[f64], hat: &[f64]| -> Result<f64> {
            let smin = linalg::dot(hat, w) - r * linalg::norm2(w);
            if !(smin > 0.0) {
                return Err(Error::InvalidParameter("a normalizer can vanish on Φ".into()));
            }
            Ok(2.0 * w.iter().cloned().fold(0.0, f64::max) / smin)
        };
        let mut beta: f64 = 0.0;
        for q in &self.queries {
            let mut w0 = vec![0.0; m1];
            let mut seen = vec![false; q.vertices()];
            for &u in &q.seed_set {
                if !std::mem::replace(&mut seen[u], true) {
                    linalg::axpy(1.0, &q.node_features[u], &mut w0);
                }
            }
            let b0 = ratio(&w0, hat1)?;
            let mut rows = 0.0;
            for es in q.out_edges() {
                if es.is_empty() {
                    rows += b0;
                } else {
                    let mut w = vec![0.0; q.m2()];
                    for e in es {
                        linalg::axpy(1.0, &q.edge_features[e], &mut w);
                    }
                    rows += ratio(&w, hat2)?;
                }
            }
            beta = beta.max(self.alpha * b0 + (1.0 - self.alpha) * rows);
        }
        Ok(beta)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let d: Dataset = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        d.validate()?;
        Ok(d)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        serde_json::to_writer_pretty(std::fs::File::create(path)?, self)?;
        Ok(())
    }

    /// Crude smoothness estimate: largest observed `‖∇f(x) − ∇f(y)‖/‖x − y‖` over random
    /// pairs in `Φ`, doubled.
    pub fn estimate_lipschitz(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut r = rng::stream(seed, 0);
        let mut best: f64 = 0.0;
        for _ in 0..samples {
            let x = self.random_point(&mut r);
            let y = self.random_point(&mut r);
            let d = linalg::dist2(&x, &y);
            if d > 1e-9 {
                let g = linalg::sub(&self.grad_exact(&x)?, &self.grad_exact(&y)?);
                best = best.max(linalg::norm2(&g) / d);
            }
        }
        Ok((2.0 * best).max(1e-6))
    }

    fn random_point<R: Rng>(&self, r: &mut R) -> Vec<f64> {
        let u: Vec<f64> = crate::oracles::sample_sphere(r, self.dim());
        let s = self.radius * rng::uniform(r).powf(1.0 / self.dim() as f64);
        self.phi_hat.iter().zip(&u).map(|(c, v)| c + s * v).collect()
    }
}

/// Adapter for the adaptive method: a request `δ` becomes `δ₁ = δ/2` for values and
/// `δ₂ = δ/(4R√m)` for gradients.
pub struct PageRankOracle<'a> {
    pub data: &'a Dataset,
    pub calls: u64,
}

impl<'a> PageRankOracle<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        PageRankOracle { data, calls: 0 }
    }

    pub fn split(&self, delta: f64) -> (f64, f64) {
        let m = self.data.dim() as f64;
        (delta / 2.0, delta / (4.0 * self.data.radius * m.sqrt()))
    }
}

impl InexactOracle<f64> for PageRankOracle<'_> {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn value(&mut self, x: &[f64], delta: f64) -> Result<f64> {
        self.calls += 1;
        self.data.loss_approx(x, self.split(delta).0)
    }

    fn eval(&mut self, x: &[f64], delta: f64) -> Result<(f64, Vec<f64>)> {
        self.calls += 1;
        let (d1, d2) = self.split(delta);
        Ok((self.data.loss_approx(x, d1)?, self.data.grad_approx(x, d2)?))
    }
}

/// Zero-order adapter at a fixed `δ₁`.
pub struct PageRankValue<'a> {
    pub data: &'a Dataset,
    pub delta1: f64,
}

impl crate::pg::ValueOracle<f64> for PageRankValue<'_> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.data.loss_approx(x, self.delta1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub queries: usize,
    pub vertices: usize,
    pub edge_prob: f64,
    pub m1: usize,
    pub m2: usize,
    pub alpha: f64,
    pub radius: f64,
    /// Number of relevance levels `ℓ`.
    pub levels: u32,
    pub seed_fraction: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { queries: 4, vertices: 10, edge_prob: 0.3, m1: 2, m2: 2, alpha: 0.15, radius: 0.5, levels: 3, seed_fraction: 0.5, seed: 0 }
    }
}

/// Erdős–Rényi query graphs with features uniform on `[0.1, 1]`, `φ̂ = 1`, and labels
/// planted from the ranking produced by a hidden `φ_true ∈ Φ`.
pub fn generate(cfg: &GenConfig) -> Result<Dataset> {
    if cfg.queries == 0 || cfg.vertices == 0 || cfg.m1 == 0 || cfg.m2 == 0 {
        return Err(Error::InvalidParameter("sizes must be positive".into()));
    }
    if !(cfg.radius > 0.0 && cfg.radius < 1.0) {
        return Err(Error::InvalidParameter("radius must lie in (0, 1) for φ̂ = 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.edge_prob) || cfg.levels == 0 {
        return Err(Error::InvalidParameter("edge probability in [0, 1] and at least one level".into()));
    }
    let m = cfg.m1 + cfg.m2;
    let phi_hat = vec![1.0; m];
    let mut hidden = rng::stream(cfg.seed, u64::MAX);
    let dir: Vec<f64> = crate::oracles::sample_sphere(&mut hidden, m);
    let phi_true: Vec<f64> = phi_hat.iter().zip(&dir).map(|(c, d)| c + 0.9 * cfg.radius * d).collect();
    let p = cfg.vertices;
    let mut queries = Vec::with_capacity(cfg.queries);
    for qi in 0..cfg.queries {
        let mut r = rng::stream(cfg.seed, qi as u64);
        let feat = |r: &mut rng::StreamRng, k: usize| -> Vec<f64> { (0..k).map(|_| 0.1 + 0.9 * rng::uniform(r)).collect() };
        let node_features: Vec<Vec<f64>> = (0..p).map(|_| feat(&mut r, cfg.m1)).collect();
        let mut edges = Vec::new();
        let mut edge_features = Vec::new();
        for i in 0..p {
            for j in 0..p {
                if i != j && rng::uniform(&mut r) < cfg.edge_prob {
                    edges.push((i, j));
                    edge_features.push(feat(&mut r, cfg.m2));
                }
            }
        }
        let mut order: Vec<usize> = (0..p).collect();
        order.shuffle(&mut r);
        let k = ((cfg.seed_fraction * p as f64).round() as usize).clamp(1, p);
        let mut seed_set = order[..k].to_vec();
        seed_set.sort_unstable();
        let mut g = QueryGraph { edges, node_features, edge_features, seed_set, relevance_labels: vec![0; p] };
        let pi = stationary_exact(&g, &phi_true, cfg.alpha)?;
        let mut rank: Vec<usize> = (0..p).collect();
        rank.sort_by(|&a, &b| pi[b].total_cmp(&pi[a]));
        for (pos, &v) in rank.iter().enumerate() {
            g.relevance_labels[v] = cfg.levels - (pos * cfg.levels as usize / p) as u32;
        }
        // One random label swap so the planted ranking is not exactly attainable.
        if p >= 2 {
            let a = r.random_range(0..p);
            let b = r.random_range(0..p);
            g.relevance_labels.swap(a, b);
        }
        queries.push(g);
    }
    let d = Dataset { alpha: cfg.alpha, phi_hat, radius: cfg.radius, queries };
    d.validate()?;
    Ok(d)
}
