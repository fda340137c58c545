//! Exact transportation LP over an ordered field (used with `BigRational`).
//!
//! Transportation simplex: northwest-corner start, potentials for reduced costs,
//! smallest-index entering and leaving cells. A brute-force basis enumeration is
//! provided for very small instances as an independent check.

use crate::error::{Error, Result};
use num_traits::{Num, Signed};
use std::collections::VecDeque;

/// Scalar for exact LP arithmetic.
pub trait Field: Clone + PartialOrd + Num + Signed {}
impl<T: Clone + PartialOrd + Num + Signed> Field for T {}

/// Optimal value and plan (row-major `rows × cols`).
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub value: T,
    pub plan: Vec<T>,
    pub pivots: usize,
}

fn check<T: Field>(cost: &[T], supply: &[T], demand: &[T]) -> Result<()> {
    let (n, m) = (supply.len(), demand.len());
    if n == 0 || m == 0 || cost.len() != n * m {
        return Err(Error::InvalidInput("transportation dimensions".into()));
    }
    if supply.iter().chain(demand).any(|v| v.is_negative()) {
        return Err(Error::InvalidInput("negative marginal".into()));
    }
    let s = supply.iter().cloned().fold(T::zero(), |a, b| a + b);
    let d = demand.iter().cloned().fold(T::zero(), |a, b| a + b);
    if s != d {
        return Err(Error::InvalidInput("supply and demand totals differ".into()));
    }
    Ok(())
}

/// Cells of the unique tree path from row node `i` to column node `j`, starting at the column end.
fn tree_path(basis: &[(usize, usize)], n: usize, m: usize, i: usize, j: usize) -> Vec<(usize, usize)> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + m];
    for (e, &(a, b)) in basis.iter().enumerate() {
        adj[a].push(e);
        adj[n + b].push(e);
    }
    let start = n + j;
    let goal = i;
    let mut parent: Vec<Option<usize>> = vec![None; n + m];
    let mut seen = vec![false; n + m];
    seen[start] = true;
    let mut q = VecDeque::from([start]);
    while let Some(u) = q.pop_front() {
        if u == goal {
            break;
        }
        for &e in &adj[u] {
            let (a, b) = basis[e];
            let w = if u == a { n + b } else { a };
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(e);
                q.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut u = goal;
    while u != start {
        let e = parent[u].expect("basis is a spanning tree");
        path.push(basis[e]);
        let (a, b) = basis[e];
        u = if u == a { n + b } else { a };
    }
    path.reverse();
    path
}

/// Exact minimum of `⟨cost, X⟩` over `{X ≥ 0 : X1 = supply, Xᵀ1 = demand}`.
pub fn transport_simplex<T: Field>(cost: &[T], supply: &[T], demand: &[T]) -> Result<LpSolution<T>> {
    check(cost, supply, demand)?;
    let (n, m) = (supply.len(), demand.len());
    let mut x = vec![T::zero(); n * m];
    let mut basic = vec![false; n * m];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(n + m - 1);
    let (mut s, mut d) = (supply.to_vec(), demand.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let v = if s[i] < d[j] { s[i].clone() } else { d[j].clone() };
        s[i] = s[i].clone() - v.clone();
        d[j] = d[j].clone() - v.clone();
        x[i * m + j] = v;
        basic[i * m + j] = true;
        basis.push((i, j));
        if i == n - 1 && j == m - 1 {
            break;
        }
        if (s[i].is_zero() && i < n - 1) || j == m - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    let cap = 50 * (n * m).max(16) * (n + m);
    let mut pivots = 0;
    loop {
        // Potentials u_i + v_j = c_ij on the basis, u_0 = 0.
        let mut u: Vec<Option<T>> = vec![None; n];
        let mut v: Vec<Option<T>> = vec![None; m];
        u[0] = Some(T::zero());
        let mut changed = true;
        while changed {
            changed = false;
            for &(a, b) in &basis {
                let c = cost[a * m + b].clone();
                match (&u[a], &v[b]) {
                    (Some(ua), None) => {
                        v[b] = Some(c - ua.clone());
                        changed = true;
                    }
                    (None, Some(vb)) => {
                        u[a] = Some(c - vb.clone());
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        let mut entering = None;
        'scan: for a in 0..n {
            for b in 0..m {
                if basic[a * m + b] {
                    continue;
                }
                let rc = cost[a * m + b].clone() - u[a].clone().expect("connected") - v[b].clone().expect("connected");
                if rc.is_negative() {
                    entering = Some((a, b));
                    break 'scan;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };
        pivots += 1;
        if pivots > cap {
            return Err(Error::NotConverged { iterations: pivots, residual: f64::NAN });
        }
        let path = tree_path(&basis, n, m, ei, ej);
        // Cells on the path alternate −, +, −, … starting from the column end.
        let minus: Vec<(usize, usize)> = path.iter().step_by(2).copied().collect();
        let plus: Vec<(usize, usize)> = path.iter().skip(1).step_by(2).copied().collect();
        let theta = minus.iter().map(|&(a, b)| x[a * m + b].clone()).fold(None, |acc: Option<T>, v| match acc {
            Some(t) if t <= v => Some(t),
            _ => Some(v),
        });
        let theta = theta.expect("cycle has a decreasing cell");
        let leaving = *minus
            .iter()
            .filter(|&&(a, b)| x[a * m + b] == theta)
            .min_by_key(|&&(a, b)| a * m + b)
            .expect("some cell attains theta");
        for &(a, b) in &minus {
            x[a * m + b] = x[a * m + b].clone() - theta.clone();
        }
        for &(a, b) in &plus {
            x[a * m + b] = x[a * m + b].clone() + theta.clone();
        }
        x[ei * m + ej] = theta;
        let pos = basis.iter().position(|&c| c == leaving).expect("leaving cell is basic");
        basis[pos] = (ei, ej);
        basic[leaving.0 * m + leaving.1] = false;
        basic[ei * m + ej] = true;
    }
    let value = cost.iter().zip(&x).fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
    Ok(LpSolution { value, plan: x, pivots })
}

fn find(parent: &mut [usize], a: usize) -> usize {
    let mut r = a;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = a;
    while parent[c] != r {
        let nx = parent[c];
        parent[c] = r;
        c = nx;
    }
    r
}

/// Solves the basic solution of a spanning-tree basis by peeling leaves. `None` if it is infeasible.
fn basic_solution<T: Field>(cells: &[(usize, usize)], supply: &[T], demand: &[T]) -> Option<Vec<T>> {
    let (n, m) = (supply.len(), demand.len());
    let mut x = vec![T::zero(); n * m];
    let mut rem: Vec<T> = supply.iter().chain(demand).cloned().collect();
    let mut alive = vec![true; cells.len()];
    let mut degree = vec![0usize; n + m];
    for &(a, b) in cells {
        degree[a] += 1;
        degree[n + b] += 1;
    }
    for _ in 0..cells.len() {
        let (e, node) = cells.iter().enumerate().filter(|(e, _)| alive[*e]).find_map(|(e, &(a, b))| {
            if degree[a] == 1 {
                Some((e, a))
            } else if degree[n + b] == 1 {
                Some((e, n + b))
            } else {
                None
            }
        })?;
        let (a, b) = cells[e];
        let val = rem[node].clone();
        if val.is_negative() {
            return None;
        }
        x[a * m + b] = val.clone();
        rem[a] = rem[a].clone() - val.clone();
        rem[n + b] = rem[n + b].clone() - val;
        alive[e] = false;
        degree[a] -= 1;
        degree[n + b] -= 1;
    }
    if rem.iter().any(|v| !v.is_zero()) {
        return None;
    }
    Some(x)
}

/// Minimum over all basic feasible solutions (every spanning tree of the bipartite cell graph).
/// Exponential; intended for `rows·cols ≤ 16`.
pub fn transport_enumerate<T: Field>(cost: &[T], supply: &[T], demand: &[T]) -> Result<LpSolution<T>> {
    check(cost, supply, demand)?;
    let (n, m) = (supply.len(), demand.len());
    let cells = n * m;
    if cells > 16 {
        return Err(Error::Unsupported("basis enumeration needs rows·cols ≤ 16".into()));
    }
    let k = n + m - 1;
    let mut best: Option<(T, Vec<T>)> = None;
    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells).filter(|c| mask >> c & 1 == 1).map(|c| (c / m, c % m)).collect();
        let mut parent: Vec<usize> = (0..n + m).collect();
        let mut acyclic = true;
        for &(a, b) in &chosen {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, n + b));
            if ra == rb {
                acyclic = false;
                break;
            }
            parent[ra] = rb;
        }
        if !acyclic {
            continue;
        }
        if let Some(x) = basic_solution(&chosen, supply, demand) {
            let val = cost.iter().zip(&x).fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, x));
            }
        }
    }
    let (value, plan) = best.expect("a feasible basis exists when totals agree");
    Ok(LpSolution { value, plan, pivots: 0 })
}
