use ixopt::ardd::*;
use ixopt::oracles::{DirDerivOracle, Quadratic, SmoothFn};
use ixopt::{linalg, rng};
use rand::Rng;
use std::sync::Arc;

fn quad(n: usize, lmin: f64, lmax: f64, seed: u64) -> Quadratic<f64> {
    let mut r = rng::stream(seed, 0);
    let d: Vec<f64> = (0..n)
        .map(|i| if i == 0 { lmax } else if i == 1 { lmin } else { r.random_range(lmin..lmax) })
        .collect();
    let xs: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    Quadratic::diagonal(&d, xs)
}

fn cfg_for(f: &Quadratic<f64>, p: u8) -> ArddConfig<f64> {
    let mut c = ArddConfig::new(p, f.dim(), f.lipschitz()).unwrap();
    c.theta = 0.5 * linalg::norm2_sq(&f.xstar);
    c
}

#[test]
fn schedules_match_listing() {
    let f = Arc::new(quad(4, 0.5, 2.0, 1));
    let cfg = cfg_for(&f, 2);
    let mut o = DirDerivOracle::noiseless(f.clone());
    let mut r = rng::stream(5, 0);
    let opts = RunOptions { f_star: Some(0.0), log_dense: usize::MAX };
    let run = ardd_run(&mut o, &cfg, &[0.0; 4], 30, 3, &mut r, &opts).unwrap();
    for row in &run.trace.rows[1..] {
        let k = row[0] - 1.0;
        assert_eq!(row[1], (k + 2.0) / (96.0 * 16.0 * 2.0));
        assert_eq!(row[2], 2.0 / (k + 2.0));
    }
    assert_eq!(o.calls(), 90);
}

#[test]
fn zero_steps_and_single_average() {
    let f = Arc::new(quad(3, 0.5, 2.0, 2));
    let cfg = cfg_for(&f, 2);
    let mut o = DirDerivOracle::noiseless(f.clone());
    let mut r = rng::stream(5, 0);
    let x0 = [0.3, -0.2, 0.1];
    let run = ardd_run(&mut o, &cfg, &x0, 0, 1, &mut r, &RunOptions::default()).unwrap();
    assert_eq!(run.point, x0.to_vec());
    let run = rdd_run(&mut o, &cfg, &x0, 1, 1, &mut r, &RunOptions::default()).unwrap();
    assert_eq!(run.point, x0.to_vec());
}

#[test]
fn call_counter_equals_n_times_m() {
    let f = Arc::new(quad(5, 0.5, 2.0, 3));
    let cfg = cfg_for(&f, 2);
    let mut o = DirDerivOracle::new(f.clone(), 0.1, 0.0, 0.0, 4);
    let mut r = rng::stream(6, 0);
    rdd_run(&mut o, &cfg, &[0.0; 5], 17, 4, &mut r, &RunOptions::default()).unwrap();
    assert_eq!(o.calls(), 68);
}

#[test]
fn p1_kappa_geometry_runs() {
    let f = Arc::new(quad(20, 0.5, 1.0, 4));
    let mut cfg = cfg_for(&f, 1);
    let setup = prox_for::<f64>(1, 20).unwrap();
    cfg.theta = setup.d(&f.xstar).unwrap();
    let mut o = DirDerivOracle::noiseless(f.clone());
    let mut r = rng::stream(7, 0);
    let opts = RunOptions { f_star: Some(0.0), log_dense: 0 };
    let run = ardd_run(&mut o, &cfg, &[0.0; 20], 3000, 1, &mut r, &opts).unwrap();
    let g0 = f.value(&[0.0; 20]);
    let g = run.trace.last("gap").unwrap();
    assert!(g < 0.1 * g0, "{g} vs {g0}");
    assert!(g <= cfg.ardd_bound(3000, 1));
}

#[test]
fn table_examples() {
    let f = quad(10, 0.5, 2.0, 5);
    let cfg = cfg_for(&f, 2);
    let eps = 1e-3;
    let pc = select_params(eps, &cfg, Variant::Ardd).unwrap();
    let expect = (100.0 * cfg.l2 * cfg.theta / eps).sqrt().ceil() as usize * 20;
    assert_eq!(pc.iterations, expect);
    let pc = select_params(eps, &cfg, Variant::Rdd).unwrap();
    assert_eq!(pc.batch, Some(1));
    let mut c2 = cfg.clone();
    c2.sigma = 1.0;
    assert_eq!(select_params(eps, &c2, Variant::Rdd).unwrap().batch, Some((1.0 / (eps * cfg.l2)).ceil() as usize));
    assert!(select_params(0.0, &cfg, Variant::Ardd).is_err());
}

#[test]
fn sc_batches_are_one_without_variance() {
    let f = Arc::new(quad(4, 0.5, 1.0, 6));
    let mut cfg = cfg_for(&f, 2);
    cfg.mu = f.strong_convexity();
    cfg.r_p = linalg::norm2(&f.xstar);
    let mut o = DirDerivOracle::noiseless(f.clone());
    let mut r = rng::stream(8, 0);
    let run = arddsc_run(&mut o, &cfg, &[0.0; 4], 3, &mut r, Some(0.0)).unwrap();
    assert!(run.plans.iter().all(|p| p.1 == 1));
    let n0 = cfg.arddsc_n0() as u64;
    assert_eq!(o.calls(), 3 * n0);
    let run0 = arddsc_run(&mut o, &cfg, &[0.0; 4], 0, &mut r, Some(0.0)).unwrap();
    assert_eq!(run0.u, vec![0.0; 4]);
}

#[test]
fn accelerated_beats_plain_on_ill_conditioned() {
    let f = Arc::new(quad(10, 1e-3, 1.0, 9));
    let cfg = cfg_for(&f, 2);
    let budget = 4000;
    let opts = RunOptions { f_star: Some(0.0), log_dense: 0 };
    let (mut a, mut b) = (0.0, 0.0);
    for s in 0..20 {
        let mut o = DirDerivOracle::noiseless(f.clone());
        let mut r = rng::stream(100 + s, 0);
        a += ardd_run(&mut o, &cfg, &[0.0; 10], budget, 1, &mut r, &opts).unwrap().trace.last("gap").unwrap();
        let mut r = rng::stream(100 + s, 1);
        b += rdd_run(&mut o, &cfg, &[0.0; 10], budget, 1, &mut r, &opts).unwrap().trace.last("gap").unwrap();
    }
    assert!(a <= b, "ARDD {a} RDD {b}");
}
