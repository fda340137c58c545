use ixopt::games::*;
use ixopt::linalg::{self, Mat};
use ixopt::prox::{FeasibleSet, ProxSetup};
use ixopt::Error;
use proptest::prelude::*;

fn zeros(n: usize, m: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; m]; n]
}

fn eye(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect()
}

/// Separable quadratic game with the given dynamics, sets and moduli.
fn base(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, sets: [PointSet; 4], au: f64, av: f64, sx: f64, sy: f64) -> GameSpec {
    let n = a.len();
    let [p_set, q_set, x_set, y_set] = sets;
    GameSpec {
        ax: TimeMatrix::Constant(a.clone()),
        ay: TimeMatrix::Constant(a),
        b: TimeMatrix::Constant(b.clone()),
        c: TimeMatrix::Constant(b),
        theta: 1.0,
        p_set,
        q_set,
        x_set,
        y_set,
        running: RunningCost { au, av, k: None },
        terminal: TerminalCost { sx, sy, h: None },
        x0: vec![0.3; n],
        y0: vec![-0.2; n],
    }
}

fn ball(dim: usize, r: f64) -> PointSet {
    PointSet::Ball { center: vec![0.0; dim], radius: r }
}

fn boxed(dim: usize, lo: f64, hi: f64) -> PointSet {
    PointSet::Box { lo: vec![lo; dim], hi: vec![hi; dim] }
}

/// `e^A` by a Taylor series on `A/2^s` followed by `s` squarings.
fn expm_series(a: &Mat<f64>) -> Mat<f64> {
    let n = a.rows;
    let s = (a.frobenius().max(1.0).log2().ceil() as i32 + 4).max(0);
    let b = a.scaled(0.5f64.powi(s));
    let mut term = Mat::identity(n);
    let mut sum = Mat::identity(n);
    for k in 1..30 {
        term = term.matmul(&b).scaled(1.0 / k as f64);
        sum = sum.add(&term);
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    sum
}

#[test]
fn zero_dynamics_integrate_controls() {
    let spec = base(zeros(2, 2), eye(2), [ball(2, 1.0), ball(2, 1.0), boxed(2, -1.0, 1.0), boxed(2, -1.0, 1.0)], 1.0, 1.0, 1.0, 1.0);
    for integ in [Integrator::Euler, Integrator::Rk4] {
        let g = discretize(&spec, 6, integ).unwrap();
        for j in 0..g.n_nodes() {
            for r in 0..2 {
                for c in 0..2 {
                    let want = if r == c { g.weights[j] } else { 0.0 };
                    assert_eq!(g.bhat[(r, 2 * j + c)], want);
                }
            }
        }
        let u: Vec<f64> = (0..2 * g.n_nodes()).map(|i| (i as f64).sin()).collect();
        let bu = g.bhat.matvec(&u);
        let integral: Vec<f64> = (0..2).map(|c| (0..g.n_nodes()).map(|j| g.weights[j] * u[2 * j + c]).sum()).collect();
        assert!(linalg::dist2(&bu, &integral) < 1e-15);
        assert!((linalg::sum(&g.weights) - 1.0).abs() < 1e-14);
        assert_eq!(g.x0t, spec.x0);
    }
}

#[test]
fn scalar_transition_is_exponential() {
    let a = -0.7;
    let tm = TimeMatrix::Constant(vec![vec![a]]);
    let v = transition_on_grid(&tm, 2.0, 64, Integrator::Rk4);
    for (j, vj) in v.iter().enumerate() {
        let tau = 2.0 * j as f64 / 64.0;
        assert!((vj[(0, 0)] - (a * (2.0 - tau)).exp()).abs() < 1e-8);
    }
    // Euler is first order.
    let e = transition_on_grid(&tm, 2.0, 64, Integrator::Euler);
    let err = (e[0][(0, 0)] - (2.0 * a).exp()).abs();
    assert!(err > 1e-4 && err < 1e-2, "{err}");
}

#[test]
fn rk4_transition_matches_series_exponential() {
    let mut r = ixopt::rng::stream(5, 0);
    use rand::Rng;
    for _ in 0..5 {
        let a = Mat::from_fn(3, 3, |_, _| r.random_range(-1.0..1.0));
        let tm = TimeMatrix::Constant((0..3).map(|i| a.row(i).to_vec()).collect());
        let v = transition_on_grid(&tm, 1.0, 64, Integrator::Rk4);
        for j in [0, 17, 40, 64] {
            let tau = j as f64 / 64.0;
            let want = expm_series(&a.scaled(1.0 - tau));
            assert!(v[j].sub(&want).max_abs() < 1e-6);
        }
    }
}

#[test]
fn refinement_gap_shrinks_with_order() {
    let spec = lq_toy(false);
    let e1 = refinement_gap(&spec, 8, Integrator::Euler);
    let e2 = refinement_gap(&spec, 16, Integrator::Euler);
    assert!((e1 / e2 - 2.0).abs() < 0.3, "{}", e1 / e2);
    let r1 = refinement_gap(&spec, 8, Integrator::Rk4);
    let r2 = refinement_gap(&spec, 16, Integrator::Rk4);
    assert!((r1 / r2 - 16.0).abs() < 3.0, "{}", r1 / r2);
}

#[test]
fn simpson_weights_integrate_cubics() {
    let (nodes, w) = quadrature(2.0, 8, Integrator::Rk4);
    let q: f64 = nodes.iter().zip(&w).map(|(t, w)| w * t.powi(3)).sum();
    assert!((q - 4.0).abs() < 1e-12);
    let (_, w) = quadrature(2.0, 7, Integrator::Rk4);
    assert!((linalg::sum(&w) - 2.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn adjoint_consistency(seed in 0u64..500, t in 1usize..12) {
        let spec = lq_toy(seed % 2 == 0);
        let g = discretize(&spec, t, if seed % 3 == 0 { Integrator::Euler } else { Integrator::Rk4 }).unwrap();
        let mut r = ixopt::rng::stream(seed, 1);
        use rand::Rng;
        let mut probe = |n: usize| -> Vec<f64> { (0..n).map(|_| r.random_range(-1.0..1.0)).collect() };
        for (m, dim) in [(&g.bhat, g.x0t.len()), (&g.chat, g.y0t.len())] {
            let mu = probe(dim);
            let u = probe(m.cols);
            let lhs = linalg::dot(&mu, &m.matvec(&u));
            let rhs = linalg::dot(&m.tmatvec(&mu), &u);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn argmax_concave_beats_feasible_points(seed in 0u64..300, a in 0.0f64..2.0) {
        let mut r = ixopt::rng::stream(seed, 2);
        use rand::Rng;
        let c: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
        for set in [boxed(3, -0.5, 1.0), ball(3, 0.7), PointSet::Simplex] {
            let u = set.argmax_concave(a, &c).unwrap();
            prop_assert!(set.contains(&u, 1e-12));
            let obj = |u: &[f64]| linalg::dot(&c, u) - 0.5 * a * linalg::norm2_sq(u);
            for _ in 0..50 {
                let w: Vec<f64> = (0..3).map(|_| r.random_range(-1.5..1.5)).collect();
                let w = set.project(&w);
                prop_assert!(obj(&w) <= obj(&u) + 1e-12);
            }
        }
    }
}

#[test]
fn psi1_unconstrained_quadratic_uses_adjoints() {
    let a = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
    let b = vec![vec![1.0], vec![0.5]];
    let big = 1e6;
    let spec = base(a, b, [ball(1, big), ball(1, big), ball(2, big), ball(2, big)], 1.0, 1.0, 1.0, 1.0);
    let g = discretize(&spec, 10, Integrator::Rk4).unwrap();
    let (lam, mu) = (vec![0.4, -1.1], vec![0.7, 0.2]);
    let (val, u, v) = psi1_solve(&g, &spec, &lam, &mu).unwrap();
    let bcol = Mat::from_rows(&[vec![1.0], vec![0.5]]);
    for j in 0..g.n_nodes() {
        let bstar = g.vx[j].matmul(&bcol).tmatvec(&mu);
        assert!((u[j] - bstar[0]).abs() < 1e-12);
    }
    // Same dynamics for y: 𝓒*λ(τ).
    for j in 0..g.n_nodes() {
        let cstar = g.vx[j].matmul(&bcol).tmatvec(&lam);
        assert!((v[j] - cstar[0]).abs() < 1e-12);
    }
    // Value: −½‖𝓑*μ‖² + ½‖𝓒*λ‖² in L².
    let want = -0.5 * g.l2_norm(&u, 1).powi(2) + 0.5 * g.l2_norm(&v, 1).powi(2);
    assert!((val - want).abs() < 1e-12);
    let (val0, u0, v0) = psi1_solve(&g, &spec, &[0.0; 2], &[0.0; 2]).unwrap();
    assert_eq!(val0, 0.0);
    assert!(u0.iter().chain(&v0).all(|&x| x == 0.0));
}

/// `min_{a∈grid_a} max_{b∈grid_b} f(a, b)`.
fn grid_saddle(f: impl Fn(f64, f64) -> f64, (alo, ahi): (f64, f64), (blo, bhi): (f64, f64), n: usize) -> (f64, f64, f64) {
    let pt = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        let a = pt(alo, ahi, i);
        let (mut m, mut bm) = (f64::NEG_INFINITY, 0.0);
        for j in 0..n {
            let b = pt(blo, bhi, j);
            let v = f(a, b);
            if v > m {
                m = v;
                bm = b;
            }
        }
        if m < best.0 {
            best = (m, a, bm);
        }
    }
    best
}

#[test]
fn psi1_box_scalar_matches_grid_search() {
    let spec = base(vec![vec![-0.3]], vec![vec![1.0]], [boxed(1, -1.0, 1.0), boxed(1, -0.5, 0.5), boxed(1, -2.0, 2.0), boxed(1, -2.0, 2.0)], 1.0, 2.0, 1.0, 1.0);
    let g = discretize(&spec, 4, Integrator::Euler).unwrap();
    let (lam, mu) = (vec![3.1], vec![-0.4]);
    let (val, u, v) = psi1_solve(&g, &spec, &lam, &mu).unwrap();
    let s = g.bhat.tmatvec(&mu);
    let t = g.chat.tmatvec(&lam);
    let mut total = 0.0;
    for j in 0..g.n_nodes() {
        let w = g.weights[j];
        let f = |a: f64, b: f64| w * (0.5 * a * a - b * b) - s[j] * a + t[j] * b;
        let (gv, ga, gb) = grid_saddle(f, (-1.0, 1.0), (-0.5, 0.5), 1001);
        assert!((ga - u[j]).abs() <= 2e-3 && (gb - v[j]).abs() <= 1e-3, "{ga} {} {gb} {}", u[j], v[j]);
        assert!((gv - f(u[j], v[j])).abs() < 1e-6);
        total += f(u[j], v[j]);
    }
    assert!((total - val).abs() < 1e-12);
    // The λ side is large enough to clamp v at the upper bound.
    assert!(v.iter().all(|&x| x == 0.5));
}

#[test]
fn psi2_examples() {
    let full = base(zeros(2, 2), eye(2), [ball(2, 1.0), ball(2, 1.0), PointSet::Full, PointSet::Full], 1.0, 1.0, 1.0, 1.0);
    let (lam, mu) = (vec![0.3, -0.8], vec![1.2, 0.1]);
    let (val, x, y) = psi2_solve(&full, &lam, &mu).unwrap();
    assert_eq!(x, vec![-1.2, -0.1]);
    assert_eq!(y, vec![-0.3, 0.8]);
    assert!((val - (-0.5 * linalg::norm2_sq(&mu) + 0.5 * linalg::norm2_sq(&lam))).abs() < 1e-15);
    let (v0, x0, y0) = psi2_solve(&full, &[0.0; 2], &[0.0; 2]).unwrap();
    assert_eq!((v0, x0, y0), (0.0, vec![0.0; 2], vec![0.0; 2]));

    let boxed_spec = base(vec![vec![0.0]], vec![vec![1.0]], [ball(1, 1.0), ball(1, 1.0), boxed(1, -0.5, 1.0), boxed(1, -1.0, 0.25)], 1.0, 1.0, 2.0, 0.5);
    for (l, m) in [(0.3, 1.7), (-0.9, -0.2), (0.05, 0.4)] {
        let (val, x, y) = psi2_solve(&boxed_spec, &[l], &[m]).unwrap();
        let f = |a: f64, b: f64| a * a - 0.25 * b * b + m * a - l * b;
        let (gv, _, _) = grid_saddle(f, (-0.5, 1.0), (-1.0, 0.25), 1001);
        assert!((gv - val).abs() < 1e-6, "{gv} {val}");
        assert!((f(x[0], y[0]) - val).abs() < 1e-15);
    }
}

#[test]
fn coupled_terminal_saddle_satisfies_stationarity() {
    let spec = lq_toy(true);
    let (lam, mu) = (vec![0.2, -0.6], vec![0.9, 0.4]);
    let (_, x, y) = psi2_solve(&spec, &lam, &mu).unwrap();
    let h = Mat::from_rows(spec.terminal.h.as_ref().unwrap());
    let gx = linalg::add(&linalg::add(&linalg::scale(spec.terminal.sx, &x), &h.matvec(&y)), &mu);
    let gy = linalg::sub(&linalg::sub(&h.tmatvec(&x), &linalg::scale(spec.terminal.sy, &y)), &lam);
    assert!(linalg::norm2(&gx) < 1e-12 && linalg::norm2(&gy) < 1e-12);
    let g = discretize(&spec, 8, Integrator::Rk4).unwrap();
    let (_, u, v) = psi1_solve(&g, &spec, &lam, &mu).unwrap();
    let s = g.bhat.tmatvec(&mu);
    let t = g.chat.tmatvec(&lam);
    let k = 0.3;
    for j in 0..g.n_nodes() {
        let w = g.weights[j];
        assert!((w * (spec.running.au * u[j] + k * v[j]) - s[j]).abs() < 1e-12);
        assert!((w * (k * u[j] - spec.running.av * v[j]) + t[j]).abs() < 1e-12);
    }
}

fn check_equilibrium(a: &Mat<f64>, u: &[f64], v: &[f64], value: f64) {
    let best_v = a.tmatvec(u).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let best_u = a.matvec(v).into_iter().fold(f64::INFINITY, f64::min);
    assert!((best_v - value).abs() < 1e-10 && (best_u - value).abs() < 1e-10, "{best_u} {value} {best_v}");
    assert!((linalg::sum(u) - 1.0).abs() < 1e-12 && u.iter().all(|&x| x >= 0.0));
    assert!((linalg::sum(v) - 1.0).abs() < 1e-12 && v.iter().all(|&x| x >= 0.0));
}

#[test]
fn matrix_game_equilibria() {
    let rps = Mat::from_rows(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]);
    let (u, v, val) = matrix_game(&rps).unwrap();
    assert!(val.abs() < 1e-12);
    for x in u.iter().chain(&v) {
        assert!((x - 1.0 / 3.0).abs() < 1e-12);
    }
    // Matching pennies with a bias: value (ad − bc)/(a + d − b − c).
    let mp = Mat::from_rows(&[vec![2.0, -1.0], vec![-1.0, 1.0]]);
    let (_, _, val) = matrix_game(&mp).unwrap();
    assert!((val - 1.0 / 5.0).abs() < 1e-12);
    // Saddle in pure strategies.
    let pure = Mat::from_rows(&[vec![3.0, 1.0], vec![4.0, 2.0]]);
    let (u, v, val) = matrix_game(&pure).unwrap();
    assert_eq!((u, v, val), (vec![1.0, 0.0], vec![1.0, 0.0], 3.0));
    let mut r = ixopt::rng::stream(11, 0);
    use rand::Rng;
    for (rows, cols) in [(3, 4), (4, 2), (5, 5)] {
        let a = Mat::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0));
        let (u, v, val) = matrix_game(&a).unwrap();
        check_equilibrium(&a, &u, &v, val);
    }
    assert!(matches!(matrix_game(&Mat::zeros(9, 2)), Err(Error::Unsupported(_))));
}

#[test]
fn beta_hat_recursion() {
    let b = beta_hat(5);
    assert_eq!(b.len(), 6);
    assert_eq!(&b[..3], &[1.0, 1.0, 2.0]);
    assert!((b[3] - 2.5).abs() < 1e-15 && (b[4] - 2.9).abs() < 1e-15);
    // β̂_k ~ √(2k).
    let b = beta_hat(100_000);
    assert!((b[100_000] / (200_000f64).sqrt() - 1.0).abs() < 0.01);
}

#[test]
fn kappa_balances_moduli() {
    let g = ZGeometry::balanced(2.0, 6.0).unwrap();
    assert_eq!(g.kappa, 0.75);
    assert_eq!(g.wl(), g.wm());
    assert!(ZGeometry::new(1.0, 1.0, 1.0).is_err());
}

#[test]
fn t_beta_closed_form_matches_mirror_step() {
    let geo = ZGeometry::balanced(0.7, 1.9).unwrap();
    let beta = 3.3;
    let (zl, zm) = (vec![0.1, -0.4], vec![1.0, 0.2, -0.3]);
    let (sl, sm) = (vec![2.0, 0.5], vec![-1.0, 0.25, 0.75]);
    let (tl, tm) = t_beta(&geo, beta, &zl, &zm, &sl, &sm);
    // Rescale to the Euclidean prox: z' = √w z, s' = s/√w, and argmax ⟨s,·⟩ = argmin ⟨−s,·⟩.
    let (rl, rm) = (geo.wl().sqrt(), geo.wm().sqrt());
    let z: Vec<f64> = zl.iter().map(|x| x * rl).chain(zm.iter().map(|x| x * rm)).collect();
    let s: Vec<f64> = sl.iter().map(|x| -x / rl).chain(sm.iter().map(|x| -x / rm)).collect();
    let p = ProxSetup::<f64>::euclidean(5);
    let x = p.mirror_step(&z, &s, beta, &FeasibleSet::Full).unwrap();
    for i in 0..2 {
        assert!((x[i] / rl - tl[i]).abs() < 1e-10);
    }
    for i in 0..3 {
        assert!((x[2 + i] / rm - tm[i]).abs() < 1e-10);
    }
}

#[test]
fn dualext_constant_bounds_operator_variation() {
    let spec = lq_toy(true);
    let g = discretize(&spec, 16, Integrator::Rk4).unwrap();
    let geo = ZGeometry::balanced(1.0, 1.0).unwrap();
    let l = dualext_lipschitz(&g, &spec, &geo);
    let mut r = ixopt::rng::stream(3, 0);
    use rand::Rng;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mut pt = || -> Vec<f64> { (0..2).map(|_| r.random_range(-3.0..3.0)).collect() };
        let (l1, m1, l2, m2) = (pt(), pt(), pt(), pt());
        let e1 = evaluate(&g, &spec, &l1, &m1).unwrap();
        let e2 = evaluate(&g, &spec, &l2, &m2).unwrap();
        let num = geo.dual_norm(&linalg::sub(&e1.g_lambda, &e2.g_lambda), &linalg::sub(&e1.g_mu, &e2.g_mu));
        let den = geo.primal_norm(&linalg::sub(&l1, &l2), &linalg::sub(&m1, &m2));
        worst = worst.max(num / den);
    }
    assert!(worst <= l, "{worst} > {l}");
}

#[test]
fn rps_sda_converges_to_uniform() {
    let spec = rock_paper_scissors();
    let g = discretize(&spec, 1, Integrator::Euler).unwrap();
    assert_eq!(g.n_nodes(), 1);
    let opts = GameOptions { iterations: 10_000, ..GameOptions::default() };
    let run = sda_run(&g, &spec, &opts).unwrap();
    for c in &run.certificates {
        assert!(c.gap >= -1e-8, "k = {}: {}", c.k, c.gap);
        assert!(c.gap <= c.bound, "k = {}: {} > {}", c.k, c.gap, c.bound);
        assert!(PointSet::Simplex.contains(&c.u, 1e-12) && PointSet::Simplex.contains(&c.v, 1e-12));
    }
    let last = run.certificates.last().unwrap();
    assert_eq!(last.k, 10_000);
    assert!(last.gap <= 0.01, "{}", last.gap);
    for x in last.u.iter().chain(&last.v) {
        assert!((x - 1.0 / 3.0).abs() < 0.05, "{:?} {:?}", last.u, last.v);
    }
}

#[test]
fn single_iteration_certifies_the_first_saddle() {
    let spec = lq_toy(false);
    let g = discretize(&spec, 16, Integrator::Rk4).unwrap();
    let run = sda_run(&g, &spec, &GameOptions { iterations: 1, ..GameOptions::default() }).unwrap();
    assert_eq!(run.certificates.len(), 1);
    let c = &run.certificates[0];
    let e = evaluate(&g, &spec, &[0.0; 2], &[0.0; 2]).unwrap();
    assert_eq!((&c.u, &c.v, &c.x, &c.y), (&e.u, &e.v, &e.x, &e.y));
    assert!((c.res_x - linalg::norm2(&e.g_mu)).abs() < 1e-15);
    assert!((c.res_y - linalg::norm2(&e.g_lambda)).abs() < 1e-15);
    assert!(c.gap >= -1e-8);
}

#[test]
fn lq_sda_residuals_decay_like_inverse_sqrt() {
    let spec = lq_toy(false);
    let g = discretize(&spec, 16, Integrator::Rk4).unwrap();
    let run = sda_run(&g, &spec, &GameOptions { iterations: 4000, cert_iters: 50, ..GameOptions::default() }).unwrap();
    let pts: Vec<_> = run.certificates.iter().filter(|c| c.k >= 100).collect();
    let ks: Vec<f64> = pts.iter().map(|c| c.k as f64).collect();
    let res: Vec<f64> = pts.iter().map(|c| c.res_x.hypot(c.res_y)).collect();
    let slope = loglog_slope(&ks, &res);
    assert!((-0.65..=-0.35).contains(&slope), "{slope}");
    for c in &run.certificates {
        assert!(c.gap >= -1e-8 && c.gap <= c.bound, "k = {}: {} vs {}", c.k, c.gap, c.bound);
        for (j, uj) in c.u.iter().enumerate() {
            assert!(spec.p_set.contains(&[*uj], 1e-12), "u[{j}]");
        }
        assert!(c.v.iter().all(|&v| spec.q_set.contains(&[v], 1e-12)));
    }
}

#[test]
fn lq_dual_extrapolation_gap_decays_like_inverse_k() {
    let spec = lq_toy(true);
    let g = discretize(&spec, 16, Integrator::Rk4).unwrap();
    let run = dual_extrapolation_run(&g, &spec, &GameOptions { iterations: 2000, cert_iters: 200, ..GameOptions::default() }).unwrap();
    for c in &run.certificates {
        assert!(c.gap >= -1e-8 && c.gap <= c.bound, "k = {}: {} vs {}", c.k, c.gap, c.bound);
    }
    let pts: Vec<_> = run.certificates.iter().filter(|c| c.k >= 20).collect();
    let ks: Vec<f64> = pts.iter().map(|c| c.k as f64).collect();
    let gaps: Vec<f64> = pts.iter().map(|c| c.gap.max(1e-300)).collect();
    let slope = loglog_slope(&ks, &gaps);
    assert!(slope <= -0.9, "{slope}");
}

#[test]
fn preconditions_are_enforced() {
    let strong = lq_toy(true);
    let g = discretize(&strong, 4, Integrator::Euler).unwrap();
    assert!(matches!(sda_run(&g, &strong, &GameOptions::default()), Err(Error::InvalidParameter(_))));
    let weak = lq_toy(false);
    let gw = discretize(&weak, 4, Integrator::Euler).unwrap();
    assert!(matches!(dual_extrapolation_run(&gw, &weak, &GameOptions::default()), Err(Error::InvalidParameter(_))));
    let mut coupled = weak.clone();
    coupled.running.k = Some(vec![vec![1.0]]);
    let gc = discretize(&coupled, 4, Integrator::Euler).unwrap();
    assert!(matches!(psi1_solve(&gc, &coupled, &[0.0; 2], &[0.0; 2]), Err(Error::Unsupported(_))));
    assert!(discretize(&weak, 0, Integrator::Euler).is_err());
    let mut bad = weak;
    bad.x0 = vec![1.0];
    assert!(discretize(&bad, 4, Integrator::Euler).is_err());
}

#[test]
fn spec_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for spec in [lq_toy(true), lq_toy(false), rock_paper_scissors()] {
        let p = dir.path().join("g.json");
        spec.save(&p).unwrap();
        assert_eq!(GameSpec::load(&p).unwrap(), spec);
    }
}
