//! The ADMM solver and the simplex oracle against a brute-force vertex
//! enumeration that shares no code with either.

use pocs_core::linalg::{LinearMap, Matrix};
use pocs_core::linearization::build_extended;
use pocs_core::measurement::{apply_sparse_corruption, observe, Corruption, SensingMatrix};
use pocs_core::rng::{stream, streams};
use pocs_core::signal::SignalVector;
use pocs_core::solver::{
    extended_lp_oracle, lp_oracle, qcbp, solve_weighted_l1, weighted_bp_equality, weighted_l1,
    SolverOptions,
};
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = stream(seed, streams::MATRIX);
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Matrix::from_row_major(rows, cols, data).unwrap()
}

fn planted(cols: usize, k: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, streams::SIGNAL);
    let mut u = vec![0.0; cols];
    for j in rand::seq::index::sample(&mut rng, cols, k) {
        u[j] = rng.sample::<f64, _>(StandardNormal) + 0.5f64.copysign(rng.gen::<f64>() - 0.5);
    }
    u
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimum weighted ℓ1 over basic solutions: every vertex of the split LP
/// is a solution supported on `rows` linearly independent columns.
fn vertex_enumeration(a: &Matrix, y: &[f64], w: &[f64]) -> f64 {
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..rows).collect();
    loop {
        let sub: Vec<Vec<f64>> = (0..rows)
            .map(|i| idx.iter().map(|&j| a.get(i, j)).collect())
            .collect();
        if let Some(v) = solve_square(sub, y.to_vec()) {
            let cost: f64 = idx.iter().zip(&v).map(|(&j, x)| w[j] * x.abs()).sum();
            best = best.min(cost);
        }
        let mut i = rows;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if idx[i] < cols - rows + i {
                idx[i] += 1;
                for j in i + 1..rows {
                    idx[j] = idx[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return best;
        }
    }
}

#[test]
fn lp_oracle_matches_vertex_enumeration() {
    for seed in 0..30u64 {
        let rows = 2 + (seed as usize % 4);
        let cols = rows + 3 + (seed as usize % 5);
        let a = gaussian_matrix(rows, cols, seed);
        let y = a.mul_vec(&planted(cols, 2.min(rows), seed));
        let mut rng = stream(seed, streams::SAMPLER);
        let w: Vec<f64> = (0..cols).map(|_| 0.5 + rng.gen::<f64>()).collect();
        let u = lp_oracle(&a, &y, &w).unwrap();
        let brute = vertex_enumeration(&a, &y, &w);
        assert!(
            (weighted_l1(&u, &w) - brute).abs() < 1e-9 * (1.0 + brute),
            "seed {seed}: simplex {} vs vertices {brute}",
            weighted_l1(&u, &w)
        );
        let res: f64 = a
            .mul_vec(&u)
            .iter()
            .zip(&y)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-9);
    }
}

#[test]
fn lp_oracle_small_examples() {
    let u = lp_oracle(&Matrix::identity(2), &[1.0, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(u, vec![1.0, 0.0]);
    let a = gaussian_matrix(3, 7, 1);
    let u = lp_oracle(&a, &[0.0; 3], &[1.0; 7]).unwrap();
    assert!(u.iter().all(|v| *v == 0.0));
}

#[test]
fn admm_matches_lp_oracle_on_random_instances() {
    let opts = SolverOptions::default();
    for seed in 0..50u64 {
        let rows = 3 + (seed as usize % 8);
        let cols = (rows + 4 + (seed as usize % 7)).min(20);
        let a = gaussian_matrix(rows, cols, 100 + seed);
        let y = a.mul_vec(&planted(cols, 1 + seed as usize % 3, seed));
        let exact = weighted_l1(
            &lp_oracle(&a, &y, &vec![1.0; cols]).unwrap(),
            &vec![1.0; cols],
        );
        let r = qcbp(&a, &y, 0.0, &opts).unwrap();
        assert!(r.converged, "seed {seed}");
        assert!(
            (r.objective - exact).abs() <= 1e-6,
            "seed {seed}: admm {} vs lp {exact}",
            r.objective
        );
    }
}

#[test]
fn admm_objective_agrees_to_1e8_on_6_by_12() {
    let opts = SolverOptions::default();
    for seed in 0..50u64 {
        let a = gaussian_matrix(6, 12, 300 + seed);
        let y = a.mul_vec(&planted(12, 2, seed));
        let exact = weighted_l1(&lp_oracle(&a, &y, &[1.0; 12]).unwrap(), &[1.0; 12]);
        let r = qcbp(&a, &y, 0.0, &opts).unwrap();
        assert!(
            (r.objective - exact).abs() <= 1e-8,
            "seed {seed}: {} vs {exact}, conv {} it {} res {}",
            r.objective,
            r.converged,
            r.iterations,
            r.constraint_residual
        );
    }
}

#[test]
fn planted_two_sparse_recovered() {
    let a = gaussian_matrix(8, 20, 77);
    let u0 = planted(20, 2, 77);
    let r = qcbp(&a, &a.mul_vec(&u0), 0.0, &SolverOptions::default()).unwrap();
    let oracle = lp_oracle(&a, &a.mul_vec(&u0), &[1.0; 20]).unwrap();
    for j in 0..20 {
        assert!((r.solution[j] - u0[j]).abs() < 1e-6);
        assert!((oracle[j] - u0[j]).abs() < 1e-9);
    }
}

#[test]
fn weighted_extended_program_matches_oracle() {
    let opts = SolverOptions::default();
    for seed in 0..10u64 {
        let phi = SensingMatrix::draw(6, 8, seed).unwrap();
        let x = SignalVector::random_sparse(8, 1, &mut stream(seed, streams::SIGNAL)).unwrap();
        let clean = observe(&phi, &x.values).unwrap();
        let zeta0 = 1.0 / 6.0;
        let z =
            apply_sparse_corruption(&phi, &x.values, &clean, zeta0, &Corruption::LargestRotateI)
                .unwrap();
        let sys = build_extended(&z.values, &phi, 1, zeta0).unwrap();
        let w = sys.coordinate_weights();
        let exact = weighted_l1(&extended_lp_oracle(&sys).unwrap(), &w);
        let r = weighted_bp_equality(&sys, &opts).unwrap();
        assert!(r.converged);
        assert!(
            (r.objective - exact).abs() <= 1e-8,
            "seed {seed}: admm {} vs lp {exact}",
            r.objective
        );
    }
}

#[test]
fn returned_iterates_respect_the_constraint() {
    let opts = SolverOptions::default();
    for seed in 0..10u64 {
        let a = gaussian_matrix(10, 30, 500 + seed);
        let y = a.mul_vec(&planted(30, 3, seed));
        let eps = 0.1 * (seed as f64);
        let r = qcbp(&a, &y, eps, &opts).unwrap();
        assert!(r.converged);
        assert!(r.constraint_residual <= eps + 10.0 * opts.tol_primal);
        let mut image = vec![0.0; 10];
        a.apply(&r.solution, &mut image);
        let direct: f64 = image
            .iter()
            .zip(&y)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        assert!((direct - r.constraint_residual).abs() < 1e-12);
    }
}

#[test]
fn best_feasible_objective_never_increases() {
    let opts = SolverOptions {
        track_objective: true,
        ..SolverOptions::default()
    };
    let a = gaussian_matrix(12, 40, 9);
    let y = a.mul_vec(&planted(40, 3, 9));
    let r = solve_weighted_l1(&a, &y, 0.2, &vec![1.0; 40], &opts).unwrap();
    assert!(!r.objective_trace.is_empty());
    for pair in r.objective_trace.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12);
    }
}
