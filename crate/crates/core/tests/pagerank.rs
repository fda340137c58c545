use ixopt::pagerank::*;
use ixopt::{linalg, rng, Error};
use proptest::prelude::*;
use rand::Rng;

/// Dense Gaussian elimination with partial pivoting.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Restart vector and transition matrix straight from the raw features.
fn raw_chain(g: &QueryGraph, phi: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = g.node_features.len();
    let m1 = g.node_features[0].len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut pi0 = vec![0.0; p];
    for &u in &g.seed_set {
        pi0[u] = dot(&phi[..m1], &g.node_features[u]);
    }
    let s: f64 = pi0.iter().sum();
    pi0.iter_mut().for_each(|v| *v /= s);
    let mut pm = vec![vec![0.0; p]; p];
    for i in 0..p {
        let out: Vec<usize> = (0..g.edges.len()).filter(|&e| g.edges[e].0 == i).collect();
        if out.is_empty() {
            pm[i] = pi0.clone();
            continue;
        }
        let tot: f64 = out.iter().map(|&e| dot(&phi[m1..], &g.edge_features[e])).sum();
        for &e in &out {
            pm[i][g.edges[e].1] += dot(&phi[m1..], &g.edge_features[e]) / tot;
        }
    }
    (pi0, pm)
}

fn oracle_stationary(g: &QueryGraph, phi: &[f64], alpha: f64) -> Vec<f64> {
    let (pi0, pm) = raw_chain(g, phi);
    let p = pi0.len();
    let a: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| (i == j) as u8 as f64 - (1.0 - alpha) * pm[j][i]).collect()).collect();
    gauss(a, pi0.iter().map(|v| alpha * v).collect())
}

fn oracle_loss(d: &Dataset, phi: &[f64]) -> f64 {
    let tot: f64 = d
        .queries
        .iter()
        .map(|q| {
            let pi = oracle_stationary(q, phi, d.alpha);
            let l = &q.relevance_labels;
            let mut s = 0.0;
            for i in 0..l.len() {
                for j in 0..l.len() {
                    if l[j] > 0 && l[i] > l[j] {
                        s += (pi[j] - pi[i]).max(0.0).powi(2);
                    }
                }
            }
            s
        })
        .sum();
    tot / d.queries.len() as f64
}

fn small(seed: u64) -> Dataset {
    generate(&GenConfig { queries: 1, vertices: 5, edge_prob: 0.4, m1: 2, m2: 2, alpha: 0.15, radius: 0.5, levels: 3, seed_fraction: 0.6, seed }).unwrap()
}

fn point_in(d: &Dataset, r: &mut impl Rng) -> Vec<f64> {
    let phi: Vec<f64> = d.phi_hat.iter().map(|c| c + r.random_range(-0.3..0.3)).collect();
    d.project(&phi)
}

fn one_vertex() -> QueryGraph {
    QueryGraph { edges: vec![(0, 0)], node_features: vec![vec![0.5]], edge_features: vec![vec![0.2]], seed_set: vec![0], relevance_labels: vec![1] }
}

#[test]
fn single_vertex_with_self_loop() {
    for n in [0, 1, 7, 50] {
        let pi = stationary_approx(&one_vertex(), &[1.0, 1.0], 0.3, n).unwrap();
        assert!((pi[0] - 1.0).abs() < 1e-15);
    }
}

#[test]
fn symmetric_pair_splits_evenly() {
    let g = QueryGraph {
        edges: vec![(0, 1), (1, 0)],
        node_features: vec![vec![0.4, 0.2]; 2],
        edge_features: vec![vec![0.3]; 2],
        seed_set: vec![0, 1],
        relevance_labels: vec![1, 1],
    };
    for n in [0, 3, 40] {
        let pi = stationary_approx(&g, &[1.0, 2.0, 0.5], 0.2, n).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-15 && (pi[1] - 0.5).abs() < 1e-15);
    }
}

#[test]
fn series_matches_linear_solve() {
    let mut r = rng::stream(3, 0);
    for seed in 0..20 {
        let d = small(seed);
        let phi = point_in(&d, &mut r);
        let q = &d.queries[0];
        let want = oracle_stationary(q, &phi, 0.15);
        let got = stationary_approx(q, &phi, 0.15, 200).unwrap();
        let l1: f64 = want.iter().zip(&got).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 <= 1e-8, "seed {seed}: {l1:e}");
        let lib = stationary_exact(q, &phi, 0.15).unwrap();
        assert!(linalg::norm1(&linalg::sub(&lib, &want)) < 1e-12);
    }
}

#[test]
fn dangling_rows_restart() {
    let g = QueryGraph {
        edges: vec![(0, 1)],
        node_features: vec![vec![1.0], vec![3.0]],
        edge_features: vec![vec![1.0]],
        seed_set: vec![0, 1],
        relevance_labels: vec![0, 0],
    };
    let c = Chain::new(&g, &[1.0, 1.0], 0.5).unwrap();
    let p = c.transition();
    assert_eq!((p[(0, 0)], p[(0, 1)]), (0.0, 1.0));
    assert_eq!((p[(1, 0)], p[(1, 1)]), (0.25, 0.75));
}

#[test]
fn zero_denominators_are_rejected() {
    let mut g = one_vertex();
    g.node_features = vec![vec![0.0]];
    assert!(matches!(stationary_approx(&g, &[1.0, 1.0], 0.3, 3), Err(Error::InvalidParameter(_))));
    let g = one_vertex();
    assert!(matches!(stationary_approx(&g, &[1.0, 0.0], 0.3, 3), Err(Error::InvalidParameter(_))));
}

#[test]
fn loss_examples() {
    let a = AssessorMatrix::from_labels(&[2, 1]);
    assert_eq!(a.pairs, vec![(0, 1)]);
    assert!((pair_loss(&a, &[0.3, 0.7]) - 0.16).abs() < 1e-15);
    assert_eq!(pair_loss(&a, &[0.7, 0.3]), 0.0);
    let a = AssessorMatrix::from_labels(&[3, 0, 1, 2]);
    assert_eq!(pair_loss(&a, &[0.4, 0.05, 0.2, 0.35]), 0.0);
}

#[test]
fn assessor_rows_count_label_pairs() {
    let labels = [3, 3, 2, 1, 1, 1, 0];
    let a = AssessorMatrix::from_labels(&labels);
    assert_eq!(a.rows(), 2 * 1 + 2 * 3 + 1 * 3);
    let dense = a.dense();
    for r in 0..dense.rows {
        let row = dense.row(r);
        assert_eq!(row.iter().filter(|&&v| v == -1.0).count(), 1);
        assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
        assert_eq!(row.iter().filter(|&&v| v == 0.0).count(), labels.len() - 2);
    }
}

#[test]
fn loss_oracle_within_delta1() {
    let mut r = rng::stream(9, 0);
    for seed in 100..140 {
        let d = small(seed);
        let phi = point_in(&d, &mut r);
        let exact = oracle_loss(&d, &phi);
        assert!((d.loss_exact(&phi).unwrap() - exact).abs() < 1e-14);
        for delta1 in [1e-1, 1e-3, 1e-6] {
            let err = (d.loss_approx(&phi, delta1).unwrap() - exact).abs();
            assert!(err <= delta1, "seed {seed}, δ₁ {delta1}: {err:e}");
        }
    }
}

fn fd_grad(d: &Dataset, phi: &[f64]) -> Vec<f64> {
    let h = 1e-5;
    (0..phi.len())
        .map(|i| {
            let mut p = phi.to_vec();
            p[i] += h;
            let fp = oracle_loss(d, &p);
            p[i] -= 2.0 * h;
            (fp - oracle_loss(d, &p)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn gradient_oracle_against_finite_differences() {
    let mut r = rng::stream(10, 0);
    for seed in 200..230 {
        let d = small(seed);
        let phi = point_in(&d, &mut r);
        let fd = fd_grad(&d, &phi);
        assert!(linalg::norm_inf(&linalg::sub(&d.grad_exact(&phi).unwrap(), &fd)) < 1e-8);
        for delta2 in [1e-1, 1e-3] {
            let g = d.grad_approx(&phi, delta2).unwrap();
            let err = linalg::norm_inf(&linalg::sub(&g, &fd));
            assert!(err <= delta2 + 1e-4, "seed {seed}: {err:e}");
        }
    }
}

#[test]
fn gradient_vanishes_when_pairs_are_ordered() {
    // Vertex 0 gets almost all restart mass and is labelled most relevant.
    let g = QueryGraph {
        edges: vec![(0, 0), (1, 0)],
        node_features: vec![vec![1.0], vec![0.01]],
        edge_features: vec![vec![1.0], vec![1.0]],
        seed_set: vec![0, 1],
        relevance_labels: vec![2, 1],
    };
    let d = Dataset { alpha: 0.3, phi_hat: vec![1.0, 1.0], radius: 0.5, queries: vec![g] };
    let phi = [1.0, 1.0];
    assert_eq!(d.loss_approx(&phi, 1e-3).unwrap(), 0.0);
    assert!(d.grad_approx(&phi, 1e-3).unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn derivative_columns_sum_to_zero() {
    let mut r = rng::stream(11, 0);
    for seed in 300..310 {
        let d = small(seed);
        let phi = point_in(&d, &mut r);
        let c = Chain::new(&d.queries[0], &phi, d.alpha).unwrap();
        let (_, dexact) = c.derivative_exact(&d.queries[0]).unwrap();
        let (_, dapprox) = c.derivative_approx(&d.queries[0], 30, 30);
        for col in 0..dexact.cols {
            assert!(linalg::sum(&dexact.col(col)).abs() < 1e-8);
            assert!(linalg::sum(&dapprox.col(col)).abs() < 1e-8);
        }
    }
}

#[test]
fn beta1_dominates_derivative_norms() {
    let mut r = rng::stream(12, 0);
    for seed in 400..420 {
        let d = small(seed);
        let beta = d.beta1().unwrap();
        let q = &d.queries[0];
        for _ in 0..5 {
            let phi = point_in(&d, &mut r);
            let c = Chain::new(q, &phi, d.alpha).unwrap();
            let d0 = c.d_pi0(q);
            let col_norm = |m: &ixopt::Matrix| (0..m.cols).map(|j| linalg::norm1(&m.col(j))).fold(0.0, f64::max);
            let mut total = d.alpha * col_norm(&d0);
            for i in 0..c.p {
                let mut e = vec![0.0; c.p];
                e[i] = 1.0;
                total += (1.0 - d.alpha) * col_norm(&c.d_rows_weighted(q, &d0, &e));
            }
            assert!(total <= beta, "{total} > {beta}");
        }
    }
}

#[test]
fn truncation_levels() {
    // ⌈ln(80)/0.5⌉ − 1 = ⌈8.764⌉ − 1
    assert_eq!(n_loss(0.5, 10, 1.0), 8);
    assert_eq!(n_loss(0.5, 0, 1.0), 0);
    assert_eq!(n_loss(0.9, 1, 100.0), 0);
    let (n1, n2) = n_grad(0.5, 2, 3.0, 0.1);
    assert_eq!(n1, ((24.0f64 * 6.0 / 0.05).ln() / 0.5).ceil() as usize - 1);
    assert_eq!(n2, ((8.0f64 * 6.0 / 0.05).ln() / 0.5).ceil() as usize - 1);
}

#[test]
fn dataset_json_roundtrip_and_determinism() {
    let cfg = GenConfig { seed: 5, ..GenConfig::default() };
    let d = generate(&cfg).unwrap();
    assert_eq!(d, generate(&cfg).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pr.json");
    d.save(&path).unwrap();
    let back = Dataset::load(&path).unwrap();
    assert_eq!(d, back);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["edges", "node_features", "edge_features", "seed_set", "relevance_labels"] {
        assert!(v["queries"][0].get(key).is_some(), "missing {key}");
    }
    assert!(d.queries.iter().all(|q| q.relevance_labels.iter().all(|&l| (1..=3).contains(&l))));
}

#[test]
fn oracle_adapter_splits_accuracy() {
    let d = small(1);
    let o = PageRankOracle::new(&d);
    let (d1, d2) = o.split(0.01);
    assert_eq!(d1, 0.005);
    assert!((d2 - 0.01 / (4.0 * 0.5 * 2.0)).abs() < 1e-18);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn approximations_stay_on_simplex(seed in 0u64..10_000, n in 0usize..60, t in 0.0f64..1.0) {
        let d = small(seed);
        let phi: Vec<f64> = d.phi_hat.iter().map(|c| c - 0.4 * t).collect();
        let pi = stationary_approx(&d.queries[0], &phi, d.alpha, n).unwrap();
        prop_assert!(pi.iter().all(|&v| v >= 0.0));
        prop_assert!((linalg::sum(&pi) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn truncation_error_decays_geometrically(seed in 0u64..10_000, n in 0usize..40) {
        let d = small(seed);
        let q = &d.queries[0];
        let exact = oracle_stationary(q, &d.phi_hat, d.alpha);
        let err = |n: usize| linalg::norm1(&linalg::sub(&stationary_approx(q, &d.phi_hat, d.alpha, n).unwrap(), &exact));
        let tail = (1.0 - d.alpha).powi(n as i32 + 1);
        prop_assert!(err(n) <= 2.0 * tail + 1e-12);
        prop_assert!(err(2 * n + 1) <= 2.0 * tail * tail + 1e-12);
    }

    #[test]
    fn lemma_bounds_hold(seed in 0u64..10_000, e1 in -6.0f64..0.0, e2 in -4.0f64..0.0) {
        let d = small(seed);
        let mut r = rng::stream(seed, 1);
        let phi = point_in(&d, &mut r);
        let (delta1, delta2) = (10f64.powf(e1), 10f64.powf(e2));
        prop_assert!((d.loss_approx(&phi, delta1).unwrap() - oracle_loss(&d, &phi)).abs() <= delta1);
        let g = d.grad_approx(&phi, delta2).unwrap();
        prop_assert!(linalg::norm_inf(&linalg::sub(&g, &d.grad_exact(&phi).unwrap())) <= delta2);
    }
}
