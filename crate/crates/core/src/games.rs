//! Linear-dynamics pursuit–evasion games solved through the conjugate saddle problem in
//! the multipliers `(λ, μ)`: time discretization, pointwise inner saddles, simple dual
//! averages for the convex–concave case and dual extrapolation for the strongly
//! convex–concave case, with averaged-strategy certificates.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::prox::{project_ball, project_simplex};
use crate::trace::Trace;
use serde::{Deserialize, Serialize};
use std::path::Path;

type M = Mat<f64>;

/// Time-dependent matrix `c0 + t·c1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMatrix {
    Constant(Vec<Vec<f64>>),
    Affine { c0: Vec<Vec<f64>>, c1: Vec<Vec<f64>> },
}

impl TimeMatrix {
    pub fn at(&self, t: f64) -> M {
        match self {
            TimeMatrix::Constant(a) => M::from_rows(a),
            TimeMatrix::Affine { c0, c1 } => M::from_rows(c0).add(&M::from_rows(c1).scaled(t)),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        let a = match self {
            TimeMatrix::Constant(a) => a,
            TimeMatrix::Affine { c0, .. } => c0,
        };
        (a.len(), a.first().map_or(0, |r| r.len()))
    }

    fn check(&self) -> Result<()> {
        let ok = |a: &Vec<Vec<f64>>| !a.is_empty() && a.iter().all(|r| r.len() == a[0].len() && r.iter().all(|v| v.is_finite()));
        match self {
            TimeMatrix::Constant(a) if ok(a) => Ok(()),
            TimeMatrix::Affine { c0, c1 } if ok(c0) && ok(c1) && c0.len() == c1.len() && c0[0].len() == c1[0].len() => Ok(()),
            _ => Err(Error::InvalidInput("malformed time matrix".into())),
        }
    }
}

/// Control or terminal-state set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSet {
    Full,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex,
}

impl PointSet {
    pub fn bounded(&self) -> bool {
        !matches!(self, PointSet::Full)
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        match self {
            PointSet::Full => v.to_vec(),
            PointSet::Box { lo, hi } => v.iter().zip(lo.iter().zip(hi)).map(|(&x, (&l, &h))| x.clamp(l, h)).collect(),
            PointSet::Ball { center, radius } => project_ball(v, center, *radius),
            PointSet::Simplex => project_simplex(v),
        }
    }

    /// `argmax_{u∈S} ⟨c, u⟩ − ½a‖u‖²`, `a ≥ 0`.
    pub fn argmax_concave(&self, a: f64, c: &[f64]) -> Result<Vec<f64>> {
        if a > 0.0 {
            return Ok(self.project(&linalg::scale(1.0 / a, c)));
        }
        match self {
            PointSet::Full if c.iter().all(|&v| v == 0.0) => Ok(vec![0.0; c.len()]),
            PointSet::Full => Err(Error::InvalidParameter("linear objective over an unbounded set".into())),
            PointSet::Box { lo, hi } => Ok(c
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&ci, (&l, &h))| if ci > 0.0 { h } else if ci < 0.0 { l } else { 0.5 * (l + h) })
                .collect()),
            PointSet::Ball { center, radius } => {
                let n = linalg::norm2(c);
                if n == 0.0 {
                    Ok(center.clone())
                } else {
                    Ok(center.iter().zip(c).map(|(&x, &ci)| x + radius * ci / n).collect())
                }
            }
            PointSet::Simplex => {
                let mut e = vec![0.0; c.len()];
                let j = (0..c.len()).fold(0, |b, i| if c[i] > c[b] { i } else { b });
                e[j] = 1.0;
                Ok(e)
            }
        }
    }

    /// `max_{s∈S} ‖s‖₂`.
    pub fn max_norm(&self, dim: usize) -> f64 {
        match self {
            PointSet::Full => f64::INFINITY,
            PointSet::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| l.abs().max(h.abs()).powi(2)).sum::<f64>().sqrt(),
            PointSet::Ball { center, radius } => linalg::norm2(center) + radius,
            PointSet::Simplex => (dim > 0) as u8 as f64,
        }
    }

    pub fn diam(&self, dim: usize) -> f64 {
        match self {
            PointSet::Full => f64::INFINITY,
            PointSet::Box { lo, hi } => linalg::dist2(lo, hi),
            PointSet::Ball { radius, .. } => 2.0 * radius,
            PointSet::Simplex => {
                if dim > 1 {
                    2f64.sqrt()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        match self {
            PointSet::Full => true,
            PointSet::Box { lo, hi } => v.iter().zip(lo.iter().zip(hi)).all(|(&x, (&l, &h))| x >= l - tol && x <= h + tol),
            PointSet::Ball { center, radius } => linalg::dist2(v, center) <= radius + tol,
            PointSet::Simplex => v.iter().all(|&x| x >= -tol) && (linalg::sum(v) - 1.0).abs() <= tol,
        }
    }

    fn check(&self, dim: usize) -> Result<()> {
        let ok = match self {
            PointSet::Full | PointSet::Simplex => true,
            PointSet::Box { lo, hi } => lo.len() == dim && hi.len() == dim && lo.iter().zip(hi).all(|(l, h)| l <= h),
            PointSet::Ball { center, radius } => center.len() == dim && *radius >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("set does not match its dimension".into()))
        }
    }
}

/// `F̃(u, v) = ½a_u‖u‖² + uᵀKv − ½a_v‖v‖²` (time invariant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningCost {
    pub au: f64,
    pub av: f64,
    #[serde(default)]
    pub k: Option<Vec<Vec<f64>>>,
}

/// `Φ(x, y) = ½s_x‖x‖² + xᵀHy − ½s_y‖y‖²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalCost {
    pub sx: f64,
    pub sy: f64,
    #[serde(default)]
    pub h: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub ax: TimeMatrix,
    pub ay: TimeMatrix,
    pub b: TimeMatrix,
    pub c: TimeMatrix,
    pub theta: f64,
    pub p_set: PointSet,
    pub q_set: PointSet,
    pub x_set: PointSet,
    pub y_set: PointSet,
    pub running: RunningCost,
    pub terminal: TerminalCost,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    Rk4,
}

impl GameSpec {
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.x0.len(), self.y0.len(), self.b.shape().1, self.c.shape().1)
    }

    pub fn validate(&self) -> Result<()> {
        for m in [&self.ax, &self.ay, &self.b, &self.c] {
            m.check()?;
        }
        let (n, m, p, q) = self.dims();
        if self.ax.shape() != (n, n) || self.ay.shape() != (m, m) || self.b.shape().0 != n || self.c.shape().0 != m {
            return Err(Error::InvalidInput("dynamics shapes do not match the states".into()));
        }
        if !(self.theta > 0.0) {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        self.p_set.check(p)?;
        self.q_set.check(q)?;
        self.x_set.check(n)?;
        self.y_set.check(m)?;
        let r = &self.running;
        let t = &self.terminal;
        if r.au < 0.0 || r.av < 0.0 || t.sx < 0.0 || t.sy < 0.0 {
            return Err(Error::InvalidParameter("quadratic moduli must be nonnegative".into()));
        }
        if let Some(k) = &r.k {
            if k.len() != p || k.iter().any(|row| row.len() != q) {
                return Err(Error::InvalidInput("coupling K must be p × q".into()));
            }
        }
        if let Some(h) = &t.h {
            if h.len() != n || h.iter().any(|row| row.len() != m) {
                return Err(Error::InvalidInput("coupling H must be n × m".into()));
            }
        }
        Ok(())
    }

    fn kmat(&self) -> Option<M> {
        self.running.k.as_ref().map(|k| M::from_rows(k))
    }

    fn hmat(&self) -> Option<M> {
        self.terminal.h.as_ref().map(|h| M::from_rows(h))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s: GameSpec = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        serde_json::to_writer_pretty(std::fs::File::create(path)?, self)?;
        Ok(())
    }
}

/// Finite-dimensional form of the game on a time grid.
#[derive(Clone, Debug)]
pub struct DiscretizedGame {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `n × pN`, block `j` is `w_j V_x(θ, τ_j) B(τ_j)`.
    pub bhat: M,
    pub chat: M,
    /// Free-motion terminal states `V_x(θ, 0)x₀`, `V_y(θ, 0)y₀`.
    pub x0t: Vec<f64>,
    pub y0t: Vec<f64>,
    /// `V_x(θ, τ_j)` per node.
    pub vx: Vec<M>,
    pub p: usize,
    pub q: usize,
    pub theta: f64,
}

/// One-interval propagator of `V' = A(t)V` from `t` to `t + h`.
fn propagator(a: &TimeMatrix, t: f64, h: f64, integ: Integrator) -> M {
    let n = a.shape().0;
    let id = M::identity(n);
    match integ {
        Integrator::Euler => id.add(&a.at(t).scaled(h)),
        Integrator::Rk4 => {
            let a0 = a.at(t);
            let am = a.at(t + 0.5 * h);
            let a1 = a.at(t + h);
            let k1 = a0.clone();
            let k2 = am.matmul(&id.add(&k1.scaled(0.5 * h)));
            let k3 = am.matmul(&id.add(&k2.scaled(0.5 * h)));
            let k4 = a1.matmul(&id.add(&k3.scaled(h)));
            id.add(&k1.add(&k2.scaled(2.0)).add(&k3.scaled(2.0)).add(&k4).scaled(h / 6.0))
        }
    }
}

/// `V(θ, τ_j)` at every grid point `τ_j = jθ/T`, `j = 0..=T`.
pub fn transition_on_grid(a: &TimeMatrix, theta: f64, t: usize, integ: Integrator) -> Vec<M> {
    let h = theta / t as f64;
    let n = a.shape().0;
    let mut out = vec![M::identity(n); t + 1];
    for j in (0..t).rev() {
        out[j] = out[j + 1].matmul(&propagator(a, j as f64 * h, h, integ));
    }
    out
}

/// Quadrature nodes and weights: left endpoints for Euler, composite Simpson for RK4
/// (trapezoid when `T` is odd).
pub fn quadrature(theta: f64, t: usize, integ: Integrator) -> (Vec<f64>, Vec<f64>) {
    let h = theta / t as f64;
    match integ {
        Integrator::Euler => ((0..t).map(|j| j as f64 * h).collect(), vec![h; t]),
        Integrator::Rk4 => {
            let nodes = (0..=t).map(|j| j as f64 * h).collect();
            let w = if t % 2 == 0 {
                (0..=t).map(|j| h / 3.0 * if j == 0 || j == t { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 }).collect()
            } else {
                (0..=t).map(|j| if j == 0 || j == t { 0.5 * h } else { h }).collect()
            };
            (nodes, w)
        }
    }
}

pub fn discretize(spec: &GameSpec, t: usize, integ: Integrator) -> Result<DiscretizedGame> {
    spec.validate()?;
    if t == 0 {
        return Err(Error::InvalidParameter("need at least one interval".into()));
    }
    let (n, m, p, q) = spec.dims();
    let (nodes, weights) = quadrature(spec.theta, t, integ);
    let vx = transition_on_grid(&spec.ax, spec.theta, t, integ);
    let vy = transition_on_grid(&spec.ay, spec.theta, t, integ);
    let nn = nodes.len();
    let mut bhat = M::zeros(n, p * nn);
    let mut chat = M::zeros(m, q * nn);
    for (j, (&tau, &w)) in nodes.iter().zip(&weights).enumerate() {
        let bj = vx[j].matmul(&spec.b.at(tau)).scaled(w);
        let cj = vy[j].matmul(&spec.c.at(tau)).scaled(w);
        for r in 0..n {
            for c in 0..p {
                bhat[(r, j * p + c)] = bj[(r, c)];
            }
        }
        for r in 0..m {
            for c in 0..q {
                chat[(r, j * q + c)] = cj[(r, c)];
            }
        }
    }
    let x0t = vx[0].matvec(&spec.x0);
    let y0t = vy[0].matvec(&spec.y0);
    Ok(DiscretizedGame { nodes, weights, bhat, chat, x0t, y0t, vx: vx[..nn].to_vec(), p, q, theta: spec.theta })
}

/// Largest entry change of `V_x(θ, 0)` between `T` and `2T` intervals.
pub fn refinement_gap(spec: &GameSpec, t: usize, integ: Integrator) -> f64 {
    let a = transition_on_grid(&spec.ax, spec.theta, t, integ);
    let b = transition_on_grid(&spec.ax, spec.theta, 2 * t, integ);
    a[0].sub(&b[0]).max_abs()
}

impl DiscretizedGame {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// `‖𝓑‖` from the weighted `L²` norm on controls to the Euclidean norm.
    pub fn b_norm(&self) -> f64 {
        weighted_norm(&self.bhat, &self.weights, self.p)
    }

    pub fn c_norm(&self) -> f64 {
        weighted_norm(&self.chat, &self.weights, self.q)
    }

    /// `‖u‖_{L²} = √(Σ w_j ‖u_j‖²)`.
    pub fn l2_norm(&self, u: &[f64], dim: usize) -> f64 {
        u.chunks(dim).zip(&self.weights).map(|(c, w)| w * linalg::norm2_sq(c)).sum::<f64>().sqrt()
    }
}

fn weighted_norm(a: &M, w: &[f64], dim: usize) -> f64 {
    let scaled = M::from_fn(a.rows, a.cols, |r, c| a[(r, c)] / w[c / dim].sqrt());
    scaled.op_norm2()
}

/// Exact value of the matrix game `min_u max_v uᵀAv` over simplices by enumerating
/// square kernels (Shapley–Snow). Returns `(u, v, value)`.
pub fn matrix_game(a: &M) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (r, c) = (a.rows, a.cols);
    if r == 0 || c == 0 {
        return Err(Error::InvalidInput("empty payoff".into()));
    }
    if r > 8 || c > 8 {
        return Err(Error::Unsupported("matrix games larger than 8 × 8".into()));
    }
    // Row player v maximizes vᵀ G u with G = Aᵀ + shift so the value is positive.
    let lo = a.data.iter().cloned().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lo;
    let g = M::from_fn(c, r, |i, j| a[(j, i)] + shift);
    let scale = g.max_abs();
    let tol = 1e-11 * scale.max(1.0);
    for k in 1..=r.min(c) {
        for rows in subsets(c, k) {
            for cols in subsets(r, k) {
                let sub = M::from_fn(k, k, |i, j| g[(rows[i], cols[j])]);
                let Ok(yk) = sub.solve(&vec![1.0; k]) else { continue };
                let Ok(xk) = sub.transpose().solve(&vec![1.0; k]) else { continue };
                let sy: f64 = yk.iter().sum();
                let sx: f64 = xk.iter().sum();
                if !(sy > 0.0 && sx > 0.0) || !sy.is_finite() || !sx.is_finite() {
                    continue;
                }
                let val = 1.0 / sy;
                if yk.iter().chain(&xk).any(|&v| v < -tol) {
                    continue;
                }
                let mut vrow = vec![0.0; c];
                let mut ucol = vec![0.0; r];
                for (i, &ri) in rows.iter().enumerate() {
                    vrow[ri] = (xk[i] / sx).max(0.0);
                }
                for (j, &cj) in cols.iter().enumerate() {
                    ucol[cj] = (yk[j] / sy).max(0.0);
                }
                let vs: f64 = vrow.iter().sum();
                let us: f64 = ucol.iter().sum();
                vrow.iter_mut().for_each(|v| *v /= vs);
                ucol.iter_mut().for_each(|v| *v /= us);
                let gu = g.matvec(&ucol);
                let vg = g.tmatvec(&vrow);
                if gu.iter().all(|&x| x <= val + tol) && vg.iter().all(|&x| x >= val - tol) {
                    return Ok((ucol, vrow, val - shift));
                }
            }
        }
    }
    Err(Error::Diverged("no equilibrium kernel found".into()))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Saddle of `w F̃(u, v) − ⟨s, u⟩ + ⟨t, v⟩` over `P × Q` at one node.
pub fn node_saddle(spec: &GameSpec, w: f64, s: &[f64], t: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = &spec.running;
    match spec.kmat() {
        None => {
            let u = spec.p_set.argmax_concave(w * r.au, s)?;
            let v = spec.q_set.argmax_concave(w * r.av, t)?;
            Ok((u, v))
        }
        Some(k) if r.au == 0.0 && r.av == 0.0 && spec.p_set == PointSet::Simplex && spec.q_set == PointSet::Simplex => {
            // u ∈ Δ, v ∈ Δ: w uᵀKv − sᵀu + tᵀv = uᵀ(wK − s1ᵀ + 1tᵀ)v.
            let a = M::from_fn(k.rows, k.cols, |i, j| w * k[(i, j)] - s[i] + t[j]);
            let (u, v, _) = matrix_game(&a)?;
            Ok((u, v))
        }
        Some(k) if r.au > 0.0 && r.av > 0.0 && spec.p_set == PointSet::Full && spec.q_set == PointSet::Full => {
            // a_u u + K v = s/w, Kᵀu − a_v v + t/w = 0.
            let (sp, tp) = (linalg::scale(1.0 / w, s), linalg::scale(1.0 / w, t));
            let kkt = k.matmul(&k.transpose()).scaled(1.0 / r.av);
            let sys = M::identity(k.rows).scaled(r.au).add(&kkt);
            let rhs = linalg::sub(&sp, &linalg::scale(1.0 / r.av, &k.matvec(&tp)));
            let u = sys.solve(&rhs)?;
            let v = linalg::scale(1.0 / r.av, &linalg::add(&k.tmatvec(&u), &tp));
            Ok((u, v))
        }
        Some(_) => Err(Error::Unsupported("coupled running cost needs simplices (bilinear) or free controls (strongly convex–concave)".into())),
    }
}

/// Pointwise solution of `min_u max_v F(u,v) − ⟨μ, 𝓑u⟩ + ⟨λ, 𝓒v⟩`.
pub fn psi1_solve(game: &DiscretizedGame, spec: &GameSpec, lambda: &[f64], mu: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let s = game.bhat.tmatvec(mu);
    let t = game.chat.tmatvec(lambda);
    let (p, q) = (game.p, game.q);
    let mut u = Vec::with_capacity(s.len());
    let mut v = Vec::with_capacity(t.len());
    for (j, &w) in game.weights.iter().enumerate() {
        let (uj, vj) = node_saddle(spec, w, &s[j * p..(j + 1) * p], &t[j * q..(j + 1) * q])?;
        u.extend(uj);
        v.extend(vj);
    }
    let val = running_value(game, spec, &u, &v) - linalg::dot(&s, &u) + linalg::dot(&t, &v);
    Ok((val, u, v))
}

/// `F(u, v) = Σ_j w_j F̃(u_j, v_j)`.
pub fn running_value(game: &DiscretizedGame, spec: &GameSpec, u: &[f64], v: &[f64]) -> f64 {
    let r = &spec.running;
    let k = spec.kmat();
    let (p, q) = (game.p, game.q);
    game.weights
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            let (uj, vj) = (&u[j * p..(j + 1) * p], &v[j * q..(j + 1) * q]);
            let cross = k.as_ref().map_or(0.0, |k| linalg::dot(uj, &k.matvec(vj)));
            w * (0.5 * r.au * linalg::norm2_sq(uj) + cross - 0.5 * r.av * linalg::norm2_sq(vj))
        })
        .sum()
}

pub fn terminal_value(spec: &GameSpec, x: &[f64], y: &[f64]) -> f64 {
    let t = &spec.terminal;
    let cross = spec.hmat().map_or(0.0, |h| linalg::dot(x, &h.matvec(y)));
    0.5 * t.sx * linalg::norm2_sq(x) + cross - 0.5 * t.sy * linalg::norm2_sq(y)
}

/// Saddle of `Φ(x, y) + ⟨μ, x⟩ − ⟨λ, y⟩` over `X × Y`.
pub fn psi2_solve(spec: &GameSpec, lambda: &[f64], mu: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let t = &spec.terminal;
    let (x, y) = match spec.hmat() {
        None => (spec.x_set.argmax_concave(t.sx, &linalg::scale(-1.0, mu))?, spec.y_set.argmax_concave(t.sy, &linalg::scale(-1.0, lambda))?),
        Some(h) if t.sx > 0.0 && t.sy > 0.0 && spec.x_set == PointSet::Full && spec.y_set == PointSet::Full => {
            // s_x x + Hy + μ = 0, Hᵀx − s_y y − λ = 0.
            let sys = M::identity(h.rows).scaled(t.sx).add(&h.matmul(&h.transpose()).scaled(1.0 / t.sy));
            let rhs = linalg::sub(&linalg::scale(1.0 / t.sy, &h.matvec(lambda)), mu);
            let x = sys.solve(&rhs)?;
            let y = linalg::scale(1.0 / t.sy, &linalg::sub(&h.tmatvec(&x), lambda));
            (x, y)
        }
        Some(_) => return Err(Error::Unsupported("coupled terminal cost needs free, strongly convex–concave terminal states".into())),
    };
    let val = terminal_value(spec, &x, &y) + linalg::dot(mu, &x) - linalg::dot(lambda, &y);
    Ok((val, x, y))
}

/// Strategies at one multiplier point and the operator `g = (∂_λψ, −∂_μψ)`.
#[derive(Clone, Debug)]
pub struct PointEval {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub psi: f64,
    pub g_lambda: Vec<f64>,
    pub g_mu: Vec<f64>,
}

pub fn evaluate(game: &DiscretizedGame, spec: &GameSpec, lambda: &[f64], mu: &[f64]) -> Result<PointEval> {
    let (p1, u, v) = psi1_solve(game, spec, lambda, mu)?;
    let (p2, x, y) = psi2_solve(spec, lambda, mu)?;
    let psi = p1 + p2 - linalg::dot(mu, &game.x0t) + linalg::dot(lambda, &game.y0t);
    let g_lambda = linalg::sub(&linalg::add(&game.chat.matvec(&v), &game.y0t), &y);
    // −∂_μψ = 𝓑u + x̃₀ − x.
    let g_mu = linalg::sub(&linalg::add(&game.bhat.matvec(&u), &game.x0t), &x);
    Ok(PointEval { u, v, x, y, psi, g_lambda, g_mu })
}

/// Prox geometry on `z = (λ, μ)`: `d(z) = κ σ_λ/2 ‖λ‖² + (1−κ) σ_μ/2 ‖μ‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZGeometry {
    pub kappa: f64,
    pub sigma_lambda: f64,
    pub sigma_mu: f64,
}

impl ZGeometry {
    pub fn new(kappa: f64, sigma_lambda: f64, sigma_mu: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) || !(sigma_lambda > 0.0) || !(sigma_mu > 0.0) {
            return Err(Error::InvalidParameter("κ ∈ (0,1) and positive prox moduli required".into()));
        }
        Ok(ZGeometry { kappa, sigma_lambda, sigma_mu })
    }

    /// `κ = σ_μ/(σ_μ + σ_λ)`.
    pub fn balanced(sigma_lambda: f64, sigma_mu: f64) -> Result<Self> {
        Self::new(sigma_mu / (sigma_mu + sigma_lambda), sigma_lambda, sigma_mu)
    }

    pub fn wl(&self) -> f64 {
        self.kappa * self.sigma_lambda
    }

    pub fn wm(&self) -> f64 {
        (1.0 - self.kappa) * self.sigma_mu
    }

    pub fn dual_norm(&self, gl: &[f64], gm: &[f64]) -> f64 {
        (linalg::norm2_sq(gl) / self.wl() + linalg::norm2_sq(gm) / self.wm()).sqrt()
    }

    pub fn primal_norm(&self, l: &[f64], m: &[f64]) -> f64 {
        (self.wl() * linalg::norm2_sq(l) + self.wm() * linalg::norm2_sq(m)).sqrt()
    }

    pub fn d_lambda(&self, l: &[f64]) -> f64 {
        0.5 * self.sigma_lambda * linalg::norm2_sq(l)
    }

    pub fn d_mu(&self, m: &[f64]) -> f64 {
        0.5 * self.sigma_mu * linalg::norm2_sq(m)
    }
}

/// `L` bounding `‖g‖_{z,∗}` for the convex–concave method.
pub fn sda_lipschitz(game: &DiscretizedGame, spec: &GameSpec, geo: &ZGeometry) -> f64 {
    let (n, m, p, q) = spec.dims();
    let bound = |s: &PointSet, d: usize| s.diam(d).max(s.max_norm(d));
    let st = game.theta.sqrt();
    let ll = st * game.c_norm() * bound(&spec.q_set, q) + bound(&spec.y_set, m) + linalg::norm2(&game.y0t);
    let lm = st * game.b_norm() * bound(&spec.p_set, p) + bound(&spec.x_set, n) + linalg::norm2(&game.x0t);
    (ll * ll / geo.wl() + lm * lm / geo.wm()).sqrt()
}

/// `L` of the strongly convex–concave method.
pub fn dualext_lipschitz(game: &DiscretizedGame, spec: &GameSpec, geo: &ZGeometry) -> f64 {
    let (b, c) = (game.b_norm(), game.c_norm());
    let r = &spec.running;
    let t = &spec.terminal;
    let luv = spec.kmat().map_or(0.0, |k| k.op_norm2());
    let lxy = spec.hmat().map_or(0.0, |h| h.op_norm2());
    let (sl, sm) = (geo.sigma_lambda, geo.sigma_mu);
    let first = 2.0 * (c * c / r.av + 1.0 / t.sy + b * c * luv / (r.au * r.av) + lxy / (t.sx * t.sy));
    let second = b * c * luv / (r.au * r.av) + lxy / (t.sx * t.sy) + b * b / r.au + 1.0 / t.sx;
    (sl + sm) / (sm * sl) * first.sqrt() * second.sqrt()
}

/// `β̂₀ = β̂₁ = 1`, `β̂_{i+1} = β̂_i + 1/β̂_i`; returns `β̂_0..=β̂_k`.
pub fn beta_hat(k: usize) -> Vec<f64> {
    let mut b = vec![1.0; k.max(1) + 1];
    for i in 1..k {
        b[i + 1] = b[i] + 1.0 / b[i];
    }
    b.truncate(k + 1);
    b
}

/// Averaged strategies with the gap `ξ − η` and feasibility residuals.
#[derive(Clone, Debug)]
pub struct SaddleCertificate {
    pub k: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Upper estimate of `ξ(û, x̂)`.
    pub xi: f64,
    /// Lower estimate of `η(v̂, ŷ)`.
    pub eta: f64,
    pub gap: f64,
    pub res_x: f64,
    pub res_y: f64,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct GameRun {
    pub certificates: Vec<SaddleCertificate>,
    pub d_lambda: f64,
    pub d_mu: f64,
    pub d: f64,
    pub l: f64,
    /// `max_i ‖g(z_i)‖_{z,∗}`.
    pub g_max: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Columns `k, gap, xi, eta, res_x, res_y, bound`.
    pub trace: Trace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameOptions {
    pub iterations: usize,
    pub gamma: f64,
    pub kappa: f64,
    pub sigma_lambda: f64,
    pub sigma_mu: f64,
    /// Certify every iteration instead of a geometric subset.
    pub log_dense: bool,
    /// Inner iterations of the certificate's multiplier searches.
    pub cert_iters: usize,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions { iterations: 1000, gamma: 1.0, kappa: 0.5, sigma_lambda: 1.0, sigma_mu: 1.0, log_dense: false, cert_iters: 300 }
    }
}

fn log_points(k: usize, dense: bool) -> Vec<usize> {
    if dense {
        return (1..=k).collect();
    }
    let mut pts = Vec::new();
    let mut i = 1usize;
    while i < k {
        pts.push(i);
        i = (i + 1).max((i as f64 * 1.15) as usize);
    }
    pts.push(k);
    pts
}

struct Averager {
    sums: [Vec<f64>; 4],
    count: usize,
}

impl Averager {
    fn new() -> Self {
        Averager { sums: Default::default(), count: 0 }
    }

    fn add(&mut self, e: &PointEval) {
        for (s, v) in self.sums.iter_mut().zip([&e.u, &e.v, &e.x, &e.y]) {
            if s.is_empty() {
                *s = vec![0.0; v.len()];
            }
            linalg::axpy(1.0, v, s);
        }
        self.count += 1;
    }

    fn mean(&self) -> [Vec<f64>; 4] {
        let c = 1.0 / self.count as f64;
        self.sums.clone().map(|s| linalg::scale(c, &s))
    }
}

/// Simple dual averages on `z = (λ, μ)`: `s_{k+1} = s_k + g(z_k)`,
/// `z_{k+1} = π_{γβ̂_{k+1}}(−s_{k+1})`, started at the prox-center.
pub fn sda_run(game: &DiscretizedGame, spec: &GameSpec, opts: &GameOptions) -> Result<GameRun> {
    for s in [&spec.p_set, &spec.q_set, &spec.x_set, &spec.y_set] {
        if !s.bounded() {
            return Err(Error::InvalidParameter("simple dual averages need bounded control and state sets".into()));
        }
    }
    if !(opts.gamma > 0.0) || opts.iterations == 0 {
        return Err(Error::InvalidParameter("γ > 0 and at least one iteration required".into()));
    }
    let geo = ZGeometry::new(opts.kappa, opts.sigma_lambda, opts.sigma_mu)?;
    let (n, m, _, _) = spec.dims();
    let bh = beta_hat(opts.iterations);
    let mut lam = vec![0.0; m];
    let mut mu = vec![0.0; n];
    let mut sl = vec![0.0; m];
    let mut sm = vec![0.0; n];
    let logs = log_points(opts.iterations, opts.log_dense);
    let mut snaps = Vec::with_capacity(logs.len());
    let mut avg = Averager::new();
    let (mut dl, mut dm, mut gmax) = (0.0f64, 0.0f64, 0.0f64);
    let mut li = 0;
    for k in 0..opts.iterations {
        dl = dl.max(geo.d_lambda(&lam));
        dm = dm.max(geo.d_mu(&mu));
        let e = evaluate(game, spec, &lam, &mu)?;
        gmax = gmax.max(geo.dual_norm(&e.g_lambda, &e.g_mu));
        avg.add(&e);
        if li < logs.len() && logs[li] == k + 1 {
            snaps.push((k + 1, avg.mean()));
            li += 1;
        }
        linalg::axpy(1.0, &e.g_lambda, &mut sl);
        linalg::axpy(1.0, &e.g_mu, &mut sm);
        let beta = opts.gamma * bh[k + 1];
        lam = linalg::scale(-1.0 / (beta * geo.wl()), &sl);
        mu = linalg::scale(-1.0 / (beta * geo.wm()), &sm);
    }
    let l = sda_lipschitz(game, spec, &geo);
    let (dl, dm) = (2.0 * dl, 2.0 * dm);
    let d = geo.kappa * dl + (1.0 - geo.kappa) * dm;
    let bound = |k: usize| bh[k] / k as f64 * (opts.gamma * d + l * l / (2.0 * opts.gamma));
    finish(game, spec, &geo, snaps, dl, dm, d, l, gmax, lam, mu, opts.cert_iters, bound)
}

/// Dual extrapolation with `β = L` and prox-center `z̄ = 0`.
pub fn dual_extrapolation_run(game: &DiscretizedGame, spec: &GameSpec, opts: &GameOptions) -> Result<GameRun> {
    let r = &spec.running;
    let t = &spec.terminal;
    if !(r.au > 0.0 && r.av > 0.0 && t.sx > 0.0 && t.sy > 0.0) {
        return Err(Error::InvalidParameter("dual extrapolation needs strongly convex–concave running and terminal costs".into()));
    }
    if spec.x_set != PointSet::Full || spec.y_set != PointSet::Full {
        return Err(Error::InvalidParameter("dual extrapolation works with free terminal states".into()));
    }
    if opts.iterations == 0 {
        return Err(Error::InvalidParameter("at least one iteration required".into()));
    }
    let geo = ZGeometry::balanced(opts.sigma_lambda, opts.sigma_mu)?;
    let l = dualext_lipschitz(game, spec, &geo);
    let (n, m, _, _) = spec.dims();
    let mut sl = vec![0.0; m];
    let mut sm = vec![0.0; n];
    let logs = log_points(opts.iterations, opts.log_dense);
    let mut snaps = Vec::with_capacity(logs.len());
    let mut avg = Averager::new();
    let (mut dl, mut dm, mut gmax) = (0.0f64, 0.0f64, 0.0f64);
    let mut li = 0;
    let (mut lam, mut mu) = (vec![0.0; m], vec![0.0; n]);
    for k in 0..opts.iterations {
        let (xl, xm) = t_beta(&geo, l, &vec![0.0; m], &vec![0.0; n], &sl, &sm);
        let ex = evaluate(game, spec, &xl, &xm)?;
        let (zl, zm) = t_beta(&geo, l, &xl, &xm, &linalg::scale(-1.0, &ex.g_lambda), &linalg::scale(-1.0, &ex.g_mu));
        let ez = evaluate(game, spec, &zl, &zm)?;
        for (a, b) in [(&xl, &xm), (&zl, &zm)] {
            dl = dl.max(geo.d_lambda(a));
            dm = dm.max(geo.d_mu(b));
        }
        gmax = gmax.max(geo.dual_norm(&ez.g_lambda, &ez.g_mu)).max(geo.dual_norm(&ex.g_lambda, &ex.g_mu));
        avg.add(&ez);
        if li < logs.len() && logs[li] == k + 1 {
            snaps.push((k + 1, avg.mean()));
            li += 1;
        }
        linalg::axpy(-1.0, &ez.g_lambda, &mut sl);
        linalg::axpy(-1.0, &ez.g_mu, &mut sm);
        lam = zl;
        mu = zm;
    }
    let (dl, dm) = (2.0 * dl, 2.0 * dm);
    let d = geo.kappa * dl + (1.0 - geo.kappa) * dm;
    finish(game, spec, &geo, snaps, dl, dm, d, l, gmax, lam, mu, opts.cert_iters, |k| l * d / k as f64)
}

/// `T_β(z, s) = argmax_x ⟨s, x − z⟩ − β ω(z, x)` for the quadratic prox.
pub fn t_beta(geo: &ZGeometry, beta: f64, zl: &[f64], zm: &[f64], sl: &[f64], sm: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let l: Vec<f64> = zl.iter().zip(sl).map(|(z, s)| z + s / (beta * geo.wl())).collect();
    let m: Vec<f64> = zm.iter().zip(sm).map(|(z, s)| z + s / (beta * geo.wm())).collect();
    (l, m)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    game: &DiscretizedGame,
    spec: &GameSpec,
    geo: &ZGeometry,
    snaps: Vec<(usize, [Vec<f64>; 4])>,
    dl: f64,
    dm: f64,
    d: f64,
    l: f64,
    gmax: f64,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    cert_iters: usize,
    bound: impl Fn(usize) -> f64,
) -> Result<GameRun> {
    let rl = (2.0 * dl / geo.sigma_lambda).sqrt();
    let rm = (2.0 * dm / geo.sigma_mu).sqrt();
    let mut trace = Trace::new(&["k", "gap", "xi", "eta", "res_x", "res_y", "bound"]);
    let mut certificates = Vec::with_capacity(snaps.len());
    let mut warm = (vec![0.0; lambda.len()], vec![0.0; mu.len()]);
    for (k, [u, v, x, y]) in snaps {
        let (xi, wl) = xi_upper(game, spec, &u, &x, rl, rm, cert_iters, &warm.0)?;
        let (eta, wm) = eta_lower(game, spec, &v, &y, rl, rm, cert_iters, &warm.1)?;
        warm = (wl, wm);
        let res_x = linalg::norm2(&linalg::sub(&linalg::add(&game.x0t, &game.bhat.matvec(&u)), &x));
        let res_y = linalg::norm2(&linalg::sub(&linalg::add(&game.y0t, &game.chat.matvec(&v)), &y));
        let b = bound(k);
        trace.push(vec![k as f64, xi - eta, xi, eta, res_x, res_y, b]);
        certificates.push(SaddleCertificate { k, u, v, x, y, xi, eta, gap: xi - eta, res_x, res_y, bound: b });
    }
    Ok(GameRun { certificates, d_lambda: dl, d_mu: dm, d, l, g_max: gmax, lambda, mu, trace })
}

/// `ξ(u, x) = ρ_μ‖x − x̃₀ − 𝓑u‖ + min_{‖λ‖≤ρ_λ} h(λ)` with
/// `h(λ) = ⟨λ, ỹ₀⟩ + max_v [F(u,v) + ⟨𝓒ᵀλ, v⟩] + max_y [Φ(x,y) − ⟨λ,y⟩]`.
/// Every evaluated `h` is an upper bound, so the returned value never underestimates `ξ`.
#[allow(clippy::too_many_arguments)]
fn xi_upper(game: &DiscretizedGame, spec: &GameSpec, u: &[f64], x: &[f64], rl: f64, rm: f64, iters: usize, warm: &[f64]) -> Result<(f64, Vec<f64>)> {
    let r = &spec.running;
    let t = &spec.terminal;
    let k = spec.kmat();
    let h = spec.hmat();
    let q = game.q;
    let p = game.p;
    let fx = 0.5 * t.sx * linalg::norm2_sq(x);
    let hx = h.as_ref().map_or(vec![0.0; game.y0t.len()], |h| h.tmatvec(x));
    let eval = |lam: &[f64]| -> Result<(f64, Vec<f64>)> {
        let tt = game.chat.tmatvec(lam);
        let mut v = Vec::with_capacity(tt.len());
        for (j, &w) in game.weights.iter().enumerate() {
            let mut c = tt[j * q..(j + 1) * q].to_vec();
            if let Some(k) = &k {
                linalg::axpy(w, &k.tmatvec(&u[j * p..(j + 1) * p]), &mut c);
            }
            v.extend(spec.q_set.argmax_concave(w * r.av, &c)?);
        }
        let y = spec.y_set.argmax_concave(t.sy, &linalg::sub(&hx, lam))?;
        let val = linalg::dot(lam, &game.y0t) + running_value(game, spec, u, &v) + linalg::dot(&tt, &v) + fx + linalg::dot(&hx, &y)
            - 0.5 * t.sy * linalg::norm2_sq(&y)
            - linalg::dot(lam, &y);
        let grad = linalg::sub(&linalg::add(&game.y0t, &game.chat.matvec(&v)), &y);
        Ok((val, grad))
    };
    let (best, arg) = minimize_on_ball(eval, rl, iters, warm)?;
    let res = linalg::norm2(&linalg::sub(&linalg::sub(x, &game.x0t), &game.bhat.matvec(u)));
    Ok((rm * res + best, arg))
}

/// `η(v, y) = −ρ_λ‖𝓒v + ỹ₀ − y‖ + max_{‖μ‖≤ρ_μ} e(μ)`, a lower estimate.
#[allow(clippy::too_many_arguments)]
fn eta_lower(game: &DiscretizedGame, spec: &GameSpec, v: &[f64], y: &[f64], rl: f64, rm: f64, iters: usize, warm: &[f64]) -> Result<(f64, Vec<f64>)> {
    let r = &spec.running;
    let t = &spec.terminal;
    let k = spec.kmat();
    let h = spec.hmat();
    let (p, q) = (game.p, game.q);
    let hy = h.as_ref().map_or(vec![0.0; game.x0t.len()], |h| h.matvec(y));
    let fy = -0.5 * t.sy * linalg::norm2_sq(y);
    // −e(μ) and its gradient.
    let eval = |mu: &[f64]| -> Result<(f64, Vec<f64>)> {
        let s = game.bhat.tmatvec(mu);
        let mut u = Vec::with_capacity(s.len());
        for (j, &w) in game.weights.iter().enumerate() {
            let mut c = s[j * p..(j + 1) * p].to_vec();
            if let Some(k) = &k {
                linalg::axpy(-w, &k.matvec(&v[j * q..(j + 1) * q]), &mut c);
            }
            u.extend(spec.p_set.argmax_concave(w * r.au, &c)?);
        }
        let x = spec.x_set.argmax_concave(t.sx, &linalg::scale(-1.0, &linalg::add(&hy, mu)))?;
        let e = -linalg::dot(mu, &game.x0t) + running_value(game, spec, &u, v) - linalg::dot(&s, &u) + 0.5 * t.sx * linalg::norm2_sq(&x)
            + linalg::dot(&x, &hy)
            + fy
            + linalg::dot(mu, &x);
        let grad = linalg::sub(&linalg::add(&game.x0t, &game.bhat.matvec(&u)), &x);
        Ok((-e, grad))
    };
    let (best, arg) = minimize_on_ball(eval, rm, iters, warm)?;
    let res = linalg::norm2(&linalg::sub(&linalg::add(&game.chat.matvec(v), &game.y0t), y));
    Ok((-rl * res - best, arg))
}

/// Accelerated projected gradient with backtracking on `{‖z‖ ≤ ρ}`; returns the smallest
/// value seen and its point. Works as a descent heuristic for nonsmooth convex `f`.
fn minimize_on_ball(mut f: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>, rho: f64, iters: usize, warm: &[f64]) -> Result<(f64, Vec<f64>)> {
    let dim = warm.len();
    let zero = vec![0.0; dim];
    let start = project_ball(warm, &zero, rho);
    let (mut best, _) = f(&zero)?;
    let mut arg = zero.clone();
    if rho == 0.0 || dim == 0 {
        return Ok((best, arg));
    }
    let (fs, _) = f(&start)?;
    if fs < best {
        best = fs;
        arg = start.clone();
    }
    let mut x = arg.clone();
    let mut y = x.clone();
    let mut tk: f64 = 1.0;
    let mut lc = 1.0;
    for _ in 0..iters {
        let (fy, gy) = f(&y)?;
        if fy < best {
            best = fy;
            arg = y.clone();
        }
        let mut tries = 0;
        let xn = loop {
            let cand = project_ball(&linalg::lincomb(1.0, &y, -1.0 / lc, &gy), &zero, rho);
            let (fc, _) = f(&cand)?;
            if fc < best {
                best = fc;
                arg = cand.clone();
            }
            let d = linalg::sub(&cand, &y);
            if fc <= fy + linalg::dot(&gy, &d) + 0.5 * lc * linalg::norm2_sq(&d) + 1e-15 * fy.abs() || tries > 40 {
                break cand;
            }
            lc *= 2.0;
            tries += 1;
        };
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        y = linalg::lincomb(1.0 + (tk - 1.0) / tn, &xn, -(tk - 1.0) / tn, &x);
        x = xn;
        tk = tn;
        lc *= 0.9;
    }
    Ok((best, arg))
}

/// Log-log least-squares slope.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Rock–paper–scissors embedded with zero dynamics, one time node and `Φ = 0`.
pub fn rock_paper_scissors() -> GameSpec {
    let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    let zero = vec![vec![0.0; 3]; 3];
    let unit_box = PointSet::Box { lo: vec![0.0; 3], hi: vec![1.0; 3] };
    GameSpec {
        ax: TimeMatrix::Constant(zero.clone()),
        ay: TimeMatrix::Constant(zero),
        b: TimeMatrix::Constant(id.clone()),
        c: TimeMatrix::Constant(id),
        theta: 1.0,
        p_set: PointSet::Simplex,
        q_set: PointSet::Simplex,
        x_set: unit_box.clone(),
        y_set: unit_box,
        running: RunningCost { au: 0.0, av: 0.0, k: Some(vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]) },
        terminal: TerminalCost { sx: 0.0, sy: 0.0, h: None },
        x0: vec![0.0; 3],
        y0: vec![0.0; 3],
    }
}

/// Planar pursuit–evasion toy with double-integrator-like dynamics.
///
/// `strongly = false`: bounded controls and terminal boxes, no couplings (convex–concave
/// method). `strongly = true`: free controls and states with couplings `K`, `H`.
pub fn lq_toy(strongly: bool) -> GameSpec {
    let a = vec![vec![0.0, 1.0], vec![-0.5, -0.1]];
    let b = vec![vec![0.0], vec![1.0]];
    let c = vec![vec![0.0], vec![0.8]];
    if strongly {
        GameSpec {
            ax: TimeMatrix::Constant(a.clone()),
            ay: TimeMatrix::Affine { c0: a, c1: vec![vec![0.0, 0.0], vec![0.0, -0.05]] },
            b: TimeMatrix::Constant(b),
            c: TimeMatrix::Constant(c),
            theta: 1.0,
            p_set: PointSet::Full,
            q_set: PointSet::Full,
            x_set: PointSet::Full,
            y_set: PointSet::Full,
            running: RunningCost { au: 1.0, av: 2.0, k: Some(vec![vec![0.3]]) },
            terminal: TerminalCost { sx: 1.0, sy: 1.5, h: Some(vec![vec![-0.5, 0.0], vec![0.0, -0.5]]) },
            x0: vec![1.0, 0.0],
            y0: vec![-0.5, 0.3],
        }
    } else {
        GameSpec {
            ax: TimeMatrix::Constant(a.clone()),
            ay: TimeMatrix::Constant(a),
            b: TimeMatrix::Constant(b),
            c: TimeMatrix::Constant(c),
            theta: 1.0,
            p_set: PointSet::Box { lo: vec![-1.0], hi: vec![1.0] },
            q_set: PointSet::Ball { center: vec![0.0], radius: 0.8 },
            x_set: PointSet::Box { lo: vec![-3.0; 2], hi: vec![3.0; 2] },
            y_set: PointSet::Box { lo: vec![-3.0; 2], hi: vec![3.0; 2] },
            running: RunningCost { au: 0.5, av: 0.5, k: None },
            terminal: TerminalCost { sx: 1.0, sy: 0.5, h: None },
            x0: vec![1.0, 0.0],
            y0: vec![-0.5, 0.3],
        }
    }
}
