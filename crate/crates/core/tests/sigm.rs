use ixopt::oracles::{DeltaLOracle, Quadratic, SmoothFn, StochasticDeltaLOracle};
use ixopt::prox::{Composite, FeasibleSet, NormTag, ProxSetup};
use ixopt::sigm::*;
use ixopt::{linalg, rng};
use rand::Rng;
use std::sync::Arc;

fn quad(n: usize, l: f64, seed: u64) -> Quadratic<f64> {
    let mut r = rng::stream(seed, 0);
    let d: Vec<f64> = (0..n).map(|i| if i == 0 { l } else { l * r.random_range(0.01..1.0) }).collect();
    let xs: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    Quadratic::diagonal(&d, xs)
}

#[test]
fn schedule_examples() {
    let s = SigmSchedule::new(1.0, 2.0, 0.5, 1.0).unwrap();
    assert!((s.a - 2f64.sqrt()).abs() < 1e-15);
    for i in 0..50 {
        assert!((s.alpha(i) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }
    let s = SigmSchedule::new(2.0, 2.0, 0.5, 1.0).unwrap();
    assert!((s.a - 2f64.powf(1.5)).abs() < 1e-15);
    for i in 0..50 {
        let expect = ((i as f64 + 2.0) / 2.0).powi(2) / s.a;
        assert!((s.big_b(i) - expect).abs() < 1e-12 * expect);
    }
    let s = SigmSchedule::new(1.5, 3.0, 0.0, 1.0).unwrap();
    for i in 0..50 {
        assert_eq!(s.beta(i), 3.0);
    }
}

#[test]
fn schedule_invariants_first_10k() {
    for &p in &[1.0, 1.3, 1.5, 1.8, 2.0] {
        let s = SigmSchedule::new(p, 1.7, 0.3, 2.0).unwrap();
        let al0 = s.alpha(0);
        assert!(al0 > 0.0 && al0 <= 1.0);
        let mut a_sum = al0;
        let mut prev_beta = s.beta(0);
        assert!(prev_beta > s.l);
        for k in 1..10_000 {
            let ak = s.alpha(k);
            a_sum += ak;
            let bk = s.beta(k);
            assert!(bk >= prev_beta);
            assert!(0.0 <= ak && ak <= s.big_b(k) * (1.0 + 1e-12));
            assert!(ak * ak * bk <= s.big_b(k) * prev_beta * (1.0 + 1e-12), "p={p} k={k}");
            assert!(s.big_b(k) <= a_sum * (1.0 + 1e-12));
            let t = s.tau(k - 1);
            assert!((0.0..=1.0 + 1e-12).contains(&t));
            prev_beta = bk;
        }
    }
}

#[test]
fn zero_iterations_is_initial_prox_step() {
    let f = Arc::new(Quadratic::isotropic(3, 2.0, vec![1.0, -1.0, 0.5]));
    let mut o = StochasticDeltaLOracle::new(DeltaLOracle::exact(f.clone()), 0.0, 0);
    let setup = ProxSetup::euclidean(3);
    let s = SigmSchedule::new(2.0, 2.0, 0.0, 1.0).unwrap();
    let run = sigm_run(&mut o, Composite::Zero, &FeasibleSet::Full, &setup, &s, &SigmOptions::new(0)).unwrap();
    let g0 = f.grad(&[0.0; 3]);
    let expect: Vec<f64> = g0.iter().map(|g| -s.alpha(0) * g / s.beta(0)).collect();
    assert_eq!(run.y, expect);
}

#[test]
fn deterministic_rate_every_k() {
    let f = Arc::new(quad(10, 4.0, 3));
    let r = linalg::norm2(&f.xstar);
    let mut o = StochasticDeltaLOracle::new(DeltaLOracle::exact(f.clone()), 0.0, 0);
    let s = SigmSchedule::new(2.0, f.lipschitz(), 0.0, r).unwrap();
    let mut opts = SigmOptions::new(1000);
    opts.phi_star = Some(0.0);
    let run = sigm_run(&mut o, Composite::Zero, &FeasibleSet::Full, &ProxSetup::euclidean(10), &s, &opts).unwrap();
    let ks = run.trace.column("k").unwrap();
    let gaps = run.trace.column("gap").unwrap();
    assert_eq!(ks.len(), 1001);
    for (k, g) in ks.iter().zip(&gaps).skip(1) {
        assert!(*g <= C1 * f.lipschitz() * r * r / (k * k), "k={k} gap={g}");
        assert!(*g <= theorem_bound_exact(*k as usize, 2.0, f.lipschitz(), r, 0.0, 0.0) + 1e-15);
    }
}

#[test]
fn intermediate_p_and_simplex_entropy() {
    // p = 1.5 on the simplex with entropy prox and an ℓ1 (δ, L) oracle
    let n = 5;
    let xs: Vec<f64> = vec![0.4, 0.3, 0.2, 0.1, 0.0];
    let f = Arc::new(Quadratic::isotropic(n, 1.0, xs));
    let mut o = StochasticDeltaLOracle::new(DeltaLOracle::new(f.clone(), 0.0, NormTag::L1, 0), 0.0, 0);
    let setup = ProxSetup::entropy(n);
    let r = (2.0 * setup.d(&f.xstar).unwrap()).sqrt();
    // ‖·‖₁ smoothness of ½‖x‖₂² is 1 since ‖x‖₂ ≤ ‖x‖₁
    let s = SigmSchedule::new(1.5, 1.0, 0.0, r).unwrap();
    let mut opts = SigmOptions::new(400);
    opts.phi_star = Some(0.0);
    let run = sigm_run(&mut o, Composite::Zero, &FeasibleSet::Simplex, &setup, &s, &opts).unwrap();
    for row in &run.trace.rows[1..] {
        assert!(row[1] <= theorem_bound(row[0] as usize, 1.5, 1.0, r, 0.0, 0.0));
    }
    assert!(ixopt::prox::is_simplex_point(&run.y, 1e-12));
}

#[test]
fn stochastic_mean_gap_20_seeds() {
    let f = Arc::new(quad(5, 1.0, 11));
    let r = linalg::norm2(&f.xstar);
    let sigma = 0.5;
    let k = 10_000;
    let mut mean = 0.0;
    for seed in 0..20 {
        let mut o = StochasticDeltaLOracle::new(DeltaLOracle::exact(f.clone()), sigma, 1000 + seed);
        let s = SigmSchedule::new(2.0, 1.0, sigma, r).unwrap();
        let mut opts = SigmOptions::new(k);
        opts.phi_star = Some(0.0);
        opts.log_dense = 0;
        let run = sigm_run(&mut o, Composite::Zero, &FeasibleSet::Full, &ProxSetup::euclidean(5), &s, &opts).unwrap();
        mean += run.trace.last("gap").unwrap() / 20.0;
    }
    let bound = theorem_bound(k, 2.0, 1.0, r, sigma, 0.0);
    assert!(mean <= bound, "mean {mean} bound {bound}");
}

fn restart_cfg(f: &Quadratic<f64>, r0: f64, sigma: f64) -> RestartConfig<f64> {
    RestartConfig {
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
    }
}

#[test]
fn restart_zero_outer_returns_start() {
    let f = Arc::new(quad(4, 2.0, 5));
    let mut o = StochasticDeltaLOracle::new(DeltaLOracle::exact(f.clone()), 0.0, 0);
    let cfg = restart_cfg(&f, 3.0, 0.0);
    let u0 = vec![0.1, 0.2, 0.3, 0.4];
    let run = sigm_restart_run(&mut o, Composite::Zero, &FeasibleSet::Full, &ProxSetup::euclidean(4), &cfg, &u0, 0, None).unwrap();
    assert_eq!(run.u, u0);
    assert_eq!(o.calls(), 0);
}

#[test]
fn restart_deterministic_geometric_decay() {
    let f = Arc::new(quad(6, 3.0, 8));
    let u0 = vec![0.0; 6];
    let r0 = linalg::norm2(&f.xstar);
    let cfg = restart_cfg(&f, r0, 0.0);
    let mut o = StochasticDeltaLOracle::new(DeltaLOracle::exact(f.clone()), 0.0, 0);
    let run = sigm_restart_run(&mut o, Composite::Zero, &FeasibleSet::Full, &ProxSetup::euclidean(6), &cfg, &u0, 8, Some(0.0)).unwrap();
    for (k, u) in run.stages.iter().enumerate() {
        let d2 = linalg::dist2(u, &f.xstar).powi(2);
        assert!(d2 <= r0 * r0 * (-(k as f64)).exp(), "stage {k}: {d2}");
    }
    assert!(run.plans.iter().all(|p| p.m_k == 1));
    let calls: usize = run.plans.iter().map(|p| p.n_k * p.m_k + 1).sum();
    assert_eq!(o.calls() as usize, calls);
}

#[test]
fn confidence_restart_sigma_zero_batches_one() {
    let f = Arc::new(quad(3, 1.0, 2));
    let cfg = restart_cfg(&f, 1.0, 0.0);
    for k in 0..5 {
        assert_eq!(cfg.plan_confidence(k, 5).m_k, 1);
    }
    // Λ = 3N makes the logarithm vanish, leaving the variance-only branch.
    let mut cfg = restart_cfg(&f, 1.0, 0.2);
    cfg.lambda = 15.0;
    let pl = cfg.plan_confidence(1, 5);
    let e = std::f64::consts::E;
    let m1 = 36.0 * e.powi(3) * C2 * C2 * 0.04 / (cfg.mu * cfg.mu * pl.n_k as f64);
    assert_eq!(pl.m_k, (m1.ceil() as usize).max(1));
}
