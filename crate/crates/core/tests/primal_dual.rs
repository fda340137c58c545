use ixopt::linalg::{self, Mat};
use ixopt::primal_dual::*;
use ixopt::rng;
use proptest::prelude::*;
use rand::Rng;

fn random_c(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 0);
    (0..n).map(|_| r.random_range(-1.0..2.0)).collect()
}

fn projection(c: &[f64]) -> Vec<f64> {
    let shift = (c.iter().sum::<f64>() - 1.0) / c.len() as f64;
    c.iter().map(|v| v - shift).collect()
}

fn random_dense(m: usize, n: usize, seed: u64) -> DenseProblem<f64> {
    let mut r = rng::stream(seed, 1);
    let a = Mat::from_fn(m, n, |_, _| r.random_range(-1.0..1.0));
    let c: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
    DenseProblem::new(Separable::Quadratic { s: 1.0, c }, a, b, None).unwrap()
}

/// `λ*` from `AAᵀλ = Ac − b` for `f = ½‖x − c‖²`.
fn lambda_star(p: &DenseProblem<f64>) -> Vec<f64> {
    let Separable::Quadratic { c, .. } = &p.f else { unreachable!() };
    let aat = p.a.matmul(&p.a.transpose());
    let rhs = linalg::sub(&p.a.matvec(c), &p.b);
    aat.solve(&rhs).unwrap()
}

#[test]
fn dual_oracle_identity_example() {
    let p = DenseProblem::new(Separable::Quadratic { s: 1.0, c: vec![0.0; 3] }, Mat::identity(3), vec![0.0; 3], None).unwrap();
    let lam = [0.3f64, -1.2, 2.0];
    let e = dual_oracle(&p, &lam).unwrap();
    for i in 0..3 {
        assert!((e.x[i] + lam[i]).abs() < 1e-15);
        assert!((e.grad[i] - lam[i]).abs() < 1e-15);
    }
    assert!((e.phi - 0.5 * linalg::norm2_sq(&lam)).abs() < 1e-14);
    let e0 = dual_oracle(&p, &[0.0; 3]).unwrap();
    assert_eq!(e0.grad, vec![0.0; 3]);
}

#[test]
fn dual_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let mut p = random_dense(3, 6, seed);
        p.bounds = Some((vec![-0.5; 6], vec![0.5; 6]));
        let mut r = rng::stream(seed, 9);
        let lam: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let e = dual_oracle(&p, &lam).unwrap();
        let direct = linalg::dot(&lam, &p.b) - p.objective(&e.x) - linalg::dot(&p.a.tmatvec(&lam), &e.x);
        assert!((direct - e.phi).abs() < 1e-10);
        for i in 0..3 {
            let h = 1e-6;
            let mut lp = lam.clone();
            lp[i] += h;
            let mut lm = lam.clone();
            lm[i] -= h;
            let fd = (dual_oracle(&p, &lp).unwrap().phi - dual_oracle(&p, &lm).unwrap().phi) / (2.0 * h);
            assert!((fd - e.grad[i]).abs() < 1e-5, "{fd} vs {}", e.grad[i]);
        }
    }
}

#[test]
fn apdagd_projects_onto_hyperplane() {
    // The feasibility bound fixes the worst-case count: k ≥ √(16‖A‖²R/(γ·1e-6)).
    for c in [vec![0.1f64, 0.5, -0.3, 0.9, 0.2], vec![0.2, 0.2, 0.2, 0.2, 0.21]] {
        let p = DenseProblem::hyperplane_projection(c.clone());
        let r = DenseProblem::hyperplane_lambda_star(&c).abs();
        let k_max = (16.0 * 5.0 * r / 1e-6f64).sqrt().ceil() as usize;
        let opts = ApdagdOptions::new(5.0, 1e-6, 1e-6);
        let run = apdagd_run(&p, &opts).unwrap();
        assert!(run.converged && run.iterations <= k_max, "iterations {} vs {k_max}", run.iterations);
        if r < 0.01 {
            assert!(run.iterations <= 200, "{}", run.iterations);
        }
        assert!(linalg::dist2(&run.x_hat, &projection(&c)) < 1e-3);
        let last = run.trace.rows.last().unwrap();
        assert!(last[3] <= 1e-6 && last[4] <= 1e-6);
    }
}

#[test]
fn apdagd_rate_and_line_search_on_hyperplane() {
    let n = 10;
    let c = random_c(n, 4);
    let p = DenseProblem::hyperplane_projection(c.clone());
    let l = n as f64;
    let r = DenseProblem::hyperplane_lambda_star(&c).abs();
    let mut opts = ApdagdOptions::new(l, 0.0, 0.0);
    opts.max_iter = 1000;
    let run = apdagd_run(&p, &opts).unwrap();
    assert_eq!(run.trace.len(), 1000);
    let mut prev_inner = 0.0;
    for row in &run.trace.rows {
        let k = row[0] as usize;
        let (gb, fb) = apdagd_bounds(p.a_norm(), r, 1.0, k);
        assert!(row[3] <= gb && row[4] <= fb, "k = {k}: {row:?} vs {gb}, {fb}");
        // Never more than one doubling past L on an exact L-smooth dual.
        assert!(row[5] <= 2.0 * l);
        assert!(row[6] >= prev_inner);
        prev_inner = row[6];
        assert!(row[3] >= -row[8] * row[4] - 1e-12);
    }
}

#[test]
fn apdagd_random_dense_rate() {
    for seed in 0..3 {
        let p = random_dense(4, 12, seed);
        let r = linalg::norm2(&lambda_star(&p));
        let mut opts = ApdagdOptions::new(0.1, 0.0, 0.0);
        opts.max_iter = 300;
        let run = apdagd_run(&p, &opts).unwrap();
        let l = p.a_norm().powi(2);
        for row in &run.trace.rows {
            let k = row[0] as usize;
            let (gb, fb) = apdagd_bounds(p.a_norm(), r, 1.0, k);
            assert!(row[3] <= gb + 1e-12 && row[4] <= fb + 1e-12);
            assert!(row[5] <= 4.0 * l);
        }
    }
}

#[test]
fn apdagd_diverges_on_unbounded_dual() {
    // Infeasible constraints x1 = 1, x1 = 2 on a box: φ decreases linearly forever but stays smooth,
    // so this checks the run ends without panicking.
    let a = Mat::from_f64_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
    let p = DenseProblem::new(Separable::Quadratic { s: 1.0, c: vec![0.0, 0.0] }, a, vec![1.0, 2.0], None).unwrap();
    let mut opts = ApdagdOptions::new(1.0, 1e-8, 1e-8);
    opts.max_iter = 50;
    let run = apdagd_run(&p, &opts).unwrap();
    assert!(!run.converged);
}

#[test]
fn apdsgm_zero_variance_matches_fixed_m_apdagd() {
    let p = random_dense(3, 8, 7);
    let l = p.a_norm().powi(2);
    let noisy = NoisyDual::new(p.clone(), 0.0);
    let run_s = apdsgm_run(&noisy, &ApdsgmOptions { l, eps: 1e-3, iterations: 200, seed: 1, log_dense: usize::MAX }).unwrap();
    let mut o = ApdagdOptions::new(l, 0.0, 0.0);
    o.fixed_m = Some(2.0 * l);
    o.max_iter = 200;
    let run_d = apdagd_run(&p, &o).unwrap();
    assert_eq!(run_s.trace.len(), run_d.trace.len());
    for (a, b) in run_s.trace.rows.iter().zip(&run_d.trace.rows) {
        for j in [1, 2, 4] {
            assert!((a[j] - b[j]).abs() <= 1e-9 * (1.0 + b[j].abs()), "{a:?} vs {b:?}");
        }
    }
    for (a, b) in run_s.x_hat.iter().zip(&run_d.x_hat) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn apdsgm_noisy_within_bound() {
    let p = random_dense(3, 8, 11);
    let ls = lambda_star(&p);
    let r = linalg::norm2(&ls);
    let xstar = p.x_of(&ls).unwrap();
    let fstar = p.objective(&xstar);
    let l = p.a_norm().powi(2);
    let eps = 1e-3;
    let n_iter = 60;
    let noisy = NoisyDual::new(p.clone(), 0.3);
    let mut mean = vec![0.0; 8];
    for seed in 0..20 {
        let run = apdsgm_run(&noisy, &ApdsgmOptions { l, eps, iterations: n_iter, seed, log_dense: 0 }).unwrap();
        linalg::axpy(1.0 / 20.0, &run.x_hat, &mut mean);
    }
    let (gb, fb) = apdsgm_bounds(l, r, eps, n_iter);
    let gap = p.objective(&mean) - fstar;
    let feas = residual(&p, &mean);
    assert!(gap <= gb && feas <= fb, "gap {gap} vs {gb}, feas {feas} vs {fb}");
}

#[test]
fn apdsgm_batches_follow_rule() {
    let p = random_dense(2, 5, 2);
    let l = p.a_norm().powi(2);
    let noisy = NoisyDual::new(p, 0.5);
    let v = noisy.sample_variance();
    let eps = 1e-2;
    let run = apdsgm_run(&noisy, &ApdsgmOptions { l, eps, iterations: 30, seed: 3, log_dense: usize::MAX }).unwrap();
    let mut c = 0.0;
    let mut total = 0.0;
    for row in &run.trace.rows {
        let a = apdsgm_alpha(l, c);
        c += a;
        let m = ((v * c / (l * a * eps)).ceil()).max(1.0);
        total += m;
        assert_eq!(row[5], m);
        assert_eq!(row[7], total);
    }
}

#[test]
fn pdugdsdr_isotropic_in_one_iteration() {
    let b: Vec<f64> = vec![0.7, -0.4, 1.1];
    let p = DenseProblem::new(Separable::Quadratic { s: 1.0, c: vec![0.0; 3] }, Mat::identity(3), b.clone(), None).unwrap();
    let opts = PdugdsdrOptions { eps_f: 0.0, eps_eq: 0.0, slack: 0.0, max_iter: 1, log_dense: usize::MAX };
    let run = pdugdsdr_run(&p, &opts).unwrap();
    for i in 0..3 {
        assert!((run.eta[i] + b[i]).abs() < 1e-9, "{:?}", run.eta);
    }
}

#[test]
fn pdugdsdr_projects_onto_hyperplane() {
    let c = random_c(10, 5);
    let p = DenseProblem::hyperplane_projection(c.clone());
    let opts = PdugdsdrOptions { eps_f: 1e-6, eps_eq: 1e-6, slack: 1e-8, max_iter: 1000, log_dense: usize::MAX };
    let run = pdugdsdr_run(&p, &opts).unwrap();
    assert!(run.converged);
    let last = run.trace.rows.last().unwrap();
    assert!(last[3].abs() <= 1e-6 && last[4] <= 1e-6);
    assert!(linalg::dist2(&run.x_hat, &projection(&c)) < 1e-6);
    assert_eq!(run.sign_violations, 0);
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for &(x, y) in points {
        num += (x.ln() - mx) * (y.ln() - my);
        den += (x.ln() - mx).powi(2);
    }
    num / den
}

#[test]
fn pdugdsdr_growth_on_smooth_instance() {
    let p = ChainProblem::<f64>::unit(500);
    let opts = PdugdsdrOptions { eps_f: 0.0, eps_eq: 0.0, slack: 0.0, max_iter: 500, log_dense: usize::MAX };
    let run = pdugdsdr_run(&p, &opts).unwrap();
    assert_eq!(run.iterations, 500);
    let pts: Vec<(f64, f64)> = run.trace.rows.iter().filter(|r| r[0] >= 10.0).map(|r| (r[0], r[5])).collect();
    let slope = loglog_slope(&pts);
    assert!(slope >= 1.9, "growth exponent {slope}");
    let mut prev = 0.0;
    for row in &run.trace.rows {
        assert!(row[5] >= prev);
        prev = row[5];
        assert!(row[3] >= -row[8] * row[4] - 1e-9);
    }
    assert_eq!(run.sign_violations, 0);
}

#[test]
fn pdugdsdr_fractional_knapsack_within_bound() {
    let n = 12;
    let mut r = rng::stream(23, 0);
    let c: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..-0.1)).collect();
    let mut sorted = c.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lam_star = -sorted[1];
    let fstar = sorted[0] + 0.5 * sorted[1];
    let p = DenseProblem::new(
        Separable::Linear { c },
        Mat::from_fn(1, n, |_, _| 1.0),
        vec![1.5],
        Some((vec![0.0; n], vec![1.0; n])),
    )
    .unwrap();
    let eps = 1e-2;
    let opts = PdugdsdrOptions { eps_f: eps, eps_eq: eps, slack: eps, max_iter: 20_000, log_dense: usize::MAX };
    let run = pdugdsdr_run(&p, &opts).unwrap();
    assert!(run.converged, "iterations {}", run.iterations);
    for row in &run.trace.rows {
        let (gb, fb) = pdugdsdr_bounds(lam_star, row[5], eps);
        assert!(row[3].abs() <= gb && row[4] <= fb, "{row:?} vs {gb} {fb}");
    }
    assert!((p.objective(&run.x_hat) - fstar).abs() < 10.0 * eps);
    assert_eq!(run.sign_violations, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weak_duality_sandwich(seed in 0u64..1000, m in 1usize..4, iters in 1usize..60) {
        let p = random_dense(m, 6, seed);
        let mut o = ApdagdOptions::new(0.5, 0.0, 0.0);
        o.max_iter = iters;
        let run = apdagd_run(&p, &o).unwrap();
        for row in &run.trace.rows {
            prop_assert!(row[3] >= -row[8] * row[4] - 1e-10);
        }
        let run = pdugdsdr_run(&p, &PdugdsdrOptions { eps_f: 0.0, eps_eq: 0.0, slack: 0.0, max_iter: iters, log_dense: usize::MAX }).unwrap();
        for row in &run.trace.rows {
            prop_assert!(row[3] >= -row[8] * row[4] - 1e-10);
        }
    }

    #[test]
    fn primal_average_stays_in_box(seed in 0u64..1000, iters in 1usize..40) {
        let mut p = random_dense(2, 5, seed);
        p.bounds = Some((vec![-0.2; 5], vec![0.3; 5]));
        let mut o = ApdagdOptions::new(1.0, 0.0, 0.0);
        o.max_iter = iters;
        let run = apdagd_run(&p, &o).unwrap();
        prop_assert!(run.x_hat.iter().all(|&v| v >= -0.2 - 1e-12 && v <= 0.3 + 1e-12));
    }

    #[test]
    fn step_roots(m in 1e-3f64..1e3, beta in 0.0f64..1e3, g2 in 1e-3f64..1e3, d in 0.0f64..10.0, ak in 0.0f64..1e3) {
        let a = apdagd_alpha(m, beta);
        prop_assert!(a > 0.0 && (m * a * a - a - beta).abs() <= 1e-9 * (1.0 + beta));
        let a = pdugdsdr_step(g2, 1e-3, d, ak);
        prop_assert!(a > 0.0 && (a * a * g2 - a * (1e-3 + 2.0 * d) - 2.0 * ak * d).abs() <= 1e-8 * (1.0 + a * a * g2));
    }
}
