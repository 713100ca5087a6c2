use as_krylov::krylov::{solve_deterministic, start, Method, SolverOptions};
use as_krylov::linop::{
    direct_solve, dot, energy_norm_sq, gen_sparse_spd, matvec, norm2, residual, DenseMatrix, LinearOperator,
    SpdGenParams,
};
use as_krylov::rng::seeded;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

fn random_spd(n: usize, seed: u64) -> (DenseMatrix, Vec<f64>) {
    let mut rng = seeded(seed);
    let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let a = &m * m.transpose() / n as f64 + DMatrix::identity(n, n) * 0.5;
    let a = (&a + a.transpose()) * 0.5;
    let b = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    (DenseMatrix::from_nalgebra(&a).assume_spd(), b)
}

fn random_general(n: usize, seed: u64) -> (DenseMatrix, Vec<f64>) {
    let mut rng = seeded(seed);
    let m = DMatrix::from_fn(n, n, |i, j| {
        let g: f64 = rng.sample(StandardNormal);
        g / (n as f64).sqrt() + if i == j { 3.0 } else { 0.0 }
    });
    let b = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    (DenseMatrix::from_nalgebra(&m), b)
}

fn tail_sums(t: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; t.len() + 1];
    for k in (0..t.len()).rev() {
        out[k] = out[k + 1] + t[k];
    }
    out
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[test]
fn cg_energy_error_telescopes() {
    for seed in 0..10 {
        let n = 10 + seed as usize * 4;
        let (a, b) = random_spd(n, seed);
        let x_star = direct_solve(&a, &b).unwrap();
        let x0 = vec![0.0; n];
        let mut it = start(Method::Cg, &a, &b, &x0, SolverOptions::default()).unwrap();
        let mut iterates = vec![x0.clone()];
        let mut t = Vec::new();
        while it.residual_norm() > 1e-13 * norm2(&b) && t.len() < 5 * n {
            let rec = it.step().unwrap();
            t.push(rec.improvement);
            iterates.push(it.solution().to_vec());
        }
        let tails = tail_sums(&t);
        let e0 = energy_norm_sq(&a, &sub(&x0, &x_star)).unwrap();
        for (j, x) in iterates.iter().enumerate() {
            let e = energy_norm_sq(&a, &sub(x, &x_star)).unwrap();
            assert!((e - tails[j]).abs() <= 1e-8 * e.max(1e-6 * e0), "seed {seed} j {j}: {e} vs {}", tails[j]);
        }
    }
}

#[test]
fn cg_improvement_factorizes() {
    let (a, b) = random_spd(8, 42);
    let s = solve_deterministic(Method::Cg, &a, &b, &[0.0; 8], 1e-12, 100, SolverOptions::default()).unwrap();
    let x_star = direct_solve(&a, &b).unwrap();
    let total: f64 = s.history.iter().map(|r| r.improvement).sum();
    let e0 = energy_norm_sq(&a, &x_star).unwrap();
    assert!((total - e0).abs() <= 1e-10 * e0);
    for r in &s.history {
        let (alpha, q) = (r.alpha.unwrap(), r.q_norm_sq.unwrap());
        assert!((alpha * alpha * q - r.improvement).abs() <= 1e-12 * r.improvement);
    }
}

#[test]
fn cg_directions_are_locally_conjugate() {
    for seed in 0..5 {
        let (a, b) = random_spd(40, 100 + seed);
        let x0 = vec![0.0; 40];
        let mut it = start(Method::Cg, &a, &b, &x0, SolverOptions::default()).unwrap();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        while it.residual_norm() > 1e-10 * norm2(&b) {
            let rec = it.step().unwrap();
            dirs.push(rec.delta_x.iter().map(|v| v / rec.alpha.unwrap()).collect());
        }
        let ad: Vec<Vec<f64>> = dirs.iter().map(|d| matvec(&a, d).unwrap()).collect();
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len().min(i + 6) {
                let c = dot(&dirs[i], &ad[j]).abs();
                let scale = (dot(&dirs[i], &ad[i]) * dot(&dirs[j], &ad[j])).sqrt();
                assert!(c <= 1e-6 * scale, "seed {seed} ({i}, {j}): {c} vs {scale}");
            }
        }
    }
}

#[test]
fn cr_residual_telescopes() {
    for seed in 0..10 {
        let n = 8 + seed as usize * 4;
        let (a, b) = random_spd(n, 200 + seed);
        let x0 = vec![0.0; n];
        let mut it = start(Method::Cr, &a, &b, &x0, SolverOptions::default()).unwrap();
        let mut iterates = vec![x0.clone()];
        let mut t = Vec::new();
        while it.residual_norm() > 1e-13 * norm2(&b) && t.len() < 5 * n {
            t.push(it.step().unwrap().improvement);
            iterates.push(it.solution().to_vec());
        }
        let tails = tail_sums(&t);
        let r0 = dot(&b, &b);
        for (j, x) in iterates.iter().enumerate() {
            let r = residual(&a, &b, x).unwrap();
            let rr = dot(&r, &r);
            assert!((rr - tails[j]).abs() <= 1e-8 * rr.max(1e-6 * r0), "seed {seed} j {j}: {rr} vs {}", tails[j]);
        }
    }
}

#[test]
fn gmres_residuals_decrease_and_match_recomputation() {
    for seed in 0..8 {
        let n = 10 + 5 * seed as usize;
        let (a, b) = random_general(n, 300 + seed);
        let x0 = vec![0.0; n];
        let mut it = start(Method::Gmres, &a, &b, &x0, SolverOptions::default()).unwrap();
        let mut prev = norm2(&b);
        let mut increments_sq = 0.0;
        while !it.exhausted() && it.residual_norm() > 1e-12 * norm2(&b) {
            let rec = it.step().unwrap();
            assert!(rec.residual_norm <= prev * (1.0 + 1e-12));
            prev = rec.residual_norm;
            let explicit = norm2(&residual(&a, &b, it.solution()).unwrap());
            assert!((explicit - rec.residual_norm).abs() <= 1e-8 * explicit + 1e-13 * norm2(&b), "seed {seed} it {}: {explicit} vs {}", rec.index, rec.residual_norm);
            let adx = matvec(&a, &rec.delta_x).unwrap();
            increments_sq += dot(&adx, &adx);
            assert!((dot(&adx, &adx) - rec.improvement).abs() <= 1e-8 * dot(&b, &b));
        }
        let r0 = dot(&b, &b);
        assert!((increments_sq - r0).abs() <= 1e-8 * r0, "{increments_sq} vs {r0}");
    }
}

#[test]
fn gmres_on_a_rotation() {
    let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
    let s = solve_deterministic(Method::Gmres, &a, &[1.0, 0.0], &[0.0, 0.0], 1e-12, 10, SolverOptions::default())
        .unwrap();
    assert_eq!(s.iterations, 2);
    assert!((s.x[0]).abs() < 1e-14 && (s.x[1] - 1.0).abs() < 1e-14);
}

#[test]
fn generated_systems_have_the_expected_difficulty() {
    let mut rng = seeded(99);
    let b: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
    for (diag, lo, hi) in [(10.0, 170, 450), (13.0, 55, 140)] {
        let a = gen_sparse_spd(&SpdGenParams { n: 500, density: 0.16, diag, seed: 1 }).unwrap();
        assert!(a.is_spd());
        let s = solve_deterministic(Method::Cg, &a, &b, &[0.0; 500], 1e-8, 5000, SolverOptions::default()).unwrap();
        assert!(s.converged);
        assert!((lo..=hi).contains(&s.iterations), "diag {diag}: {} iterations", s.iterations);
    }
}
