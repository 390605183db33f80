//! Over-relaxed ADMM for `min Σ_j w_j|u_j|  s.t.  ‖Au − y‖_2 ≤ ε`.
//!
//! Splitting: a free copy `x` of `u`, and `v = Ax − y` constrained to the
//! ε-ball. The coupling `[I; A] x − [u; v] = [0; y]` carries one penalty
//! `ρ`, so the x-update
//!
//! ```text
//! (I + AᵀA) x = (u − p) + Aᵀ(y + v − q)
//! ```
//!
//! does not depend on `ρ` and its factorization survives penalty updates.
//! It is solved through the `rows × rows` Cholesky factor of
//! `G = I + AAᵀ`: with `g = y + v − q`, `t = A(u − p) + AAᵀ g` and
//! `c = G⁻¹ t`, one gets `x = (u − p) + Aᵀ(g − c)` and, for free,
//! `Ax = c`. Each iteration therefore costs one product with `A`, one with
//! `Aᵀ`, and two small triangular solves.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_problem, weighted_l1, SolveReport, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Cholesky, LinearMap, Matrix};

const BALANCE_RATIO: f64 = 10.0;
const RHO_STEP: f64 = 2.0;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
/// Penalty changes are capped so the iteration ends at a fixed `ρ`, where
/// ADMM convergence holds; unbounded rebalancing can oscillate.
const MAX_RHO_UPDATES: usize = 20;

#[inline]
fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn project_ball(v: &mut [f64], radius: f64) {
    if radius == 0.0 {
        v.iter_mut().for_each(|e| *e = 0.0);
        return;
    }
    let nrm = norm2(v);
    if nrm > radius {
        let f = radius / nrm;
        v.iter_mut().for_each(|e| *e *= f);
    }
}

fn residual_norm<A: LinearMap + ?Sized>(a: &A, u: &[f64], y: &[f64], buf: &mut [f64]) -> f64 {
    a.apply(u, buf);
    let sq: f64 = buf
        .iter()
        .zip(y)
        .map(|(av, yv)| (av - yv) * (av - yv))
        .sum();
    libm::sqrt(sq)
}

/// Smallest achievable `‖Au − y‖_2`, from a lightly regularized normal
/// equation: `(AAᵀ + μI) c = y` gives `y − AAᵀc = μc → (I − P)y`.
fn least_residual(aat: &Matrix, y: &[f64]) -> Result<f64> {
    let m = aat.nrows();
    let trace: f64 = (0..m).map(|i| aat.get(i, i)).sum();
    let mu = 1e-10 * (trace / m as f64).max(1e-300);
    let mut g = aat.clone();
    for i in 0..m {
        g.set(i, i, g.get(i, i) + mu);
    }
    let chol = Cholesky::factor(&g)?;
    let mut c = y.to_vec();
    chol.solve_in_place(&mut c);
    Ok(mu * norm2(&c))
}

/// Solves the weighted ℓ1 program; see the module docs for the splitting.
pub fn solve_weighted_l1<A: LinearMap + ?Sized>(
    a: &A,
    y: &[f64],
    epsilon: f64,
    weights: &[f64],
    opts: &SolverOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    check_problem(a, y, epsilon, weights)?;
    let (rows, cols) = (a.rows(), a.cols());
    let alpha = opts.relaxation;

    if norm2(y) <= epsilon {
        // zero is feasible and has the least possible objective
        let solution = vec![0.0; cols];
        return Ok(SolveReport {
            constraint_residual: norm2(y),
            solution,
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            converged: true,
            final_rho: opts.rho,
            objective: 0.0,
            objective_trace: Vec::new(),
        });
    }

    let aat = a.outer_gram();
    let floor = least_residual(&aat, y)?;
    if floor > epsilon + 1e-6 * (1.0 + norm2(y)) {
        return Err(Error::Infeasible(
            "no point satisfies the residual constraint for this epsilon",
        ));
    }
    let mut gram = aat.clone();
    for i in 0..rows {
        gram.set(i, i, gram.get(i, i) + 1.0);
    }
    let chol = Cholesky::factor(&gram)?;

    let mut rho = opts.rho;
    let mut rho_updates = 0;
    let mut x = vec![0.0; cols];
    let mut u = vec![0.0; cols];
    let mut u_old = vec![0.0; cols];
    let mut p = vec![0.0; cols];
    let mut v = vec![0.0; rows];
    let mut v_old = vec![0.0; rows];
    let mut q = vec![0.0; rows];

    let mut g = vec![0.0; rows];
    let mut t = vec![0.0; rows];
    let mut c = vec![0.0; rows];
    let mut r0 = vec![0.0; cols];
    let mut tmp_cols = vec![0.0; cols];
    let mut tmp_rows = vec![0.0; rows];

    let mut best_u = u.clone();
    let mut best_primal = f64::INFINITY;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut best_feasible = f64::INFINITY;
    let feas_slack = 10.0 * opts.tol_primal;

    for k in 1..=opts.max_iter {
        iterations = k;
        // x-update via the cached factorization
        for i in 0..rows {
            g[i] = y[i] + v[i] - q[i];
        }
        for j in 0..cols {
            r0[j] = u[j] - p[j];
        }
        a.apply(&r0, &mut t);
        for i in 0..rows {
            t[i] += dot(aat.row(i), &g);
        }
        c.copy_from_slice(&t);
        chol.solve_in_place(&mut c);
        for i in 0..rows {
            tmp_rows[i] = g[i] - c[i];
        }
        a.apply_transpose(&tmp_rows, &mut x);
        for j in 0..cols {
            x[j] += r0[j];
        }

        // relaxed coupling terms, then the two proximal steps
        u_old.copy_from_slice(&u);
        v_old.copy_from_slice(&v);
        for j in 0..cols {
            let xh = alpha * x[j] + (1.0 - alpha) * u_old[j];
            let arg = xh + p[j];
            u[j] = soft_threshold(arg, weights[j] / rho);
            p[j] = arg - u[j];
        }
        for i in 0..rows {
            let hh = alpha * c[i] + (1.0 - alpha) * (v_old[i] + y[i]);
            tmp_rows[i] = hh - y[i] + q[i];
        }
        v.copy_from_slice(&tmp_rows);
        project_ball(&mut v, epsilon);
        for i in 0..rows {
            q[i] = tmp_rows[i] - v[i];
        }

        if k % opts.check_every != 0 && k != opts.max_iter {
            continue;
        }

        let mut pr2 = 0.0;
        for j in 0..cols {
            pr2 += (x[j] - u[j]) * (x[j] - u[j]);
        }
        for i in 0..rows {
            let d = c[i] - y[i] - v[i];
            pr2 += d * d;
        }
        primal = libm::sqrt(pr2);
        for i in 0..rows {
            tmp_rows[i] = v[i] - v_old[i];
        }
        a.apply_transpose(&tmp_rows, &mut tmp_cols);
        let mut du2 = 0.0;
        for j in 0..cols {
            let d = u[j] - u_old[j] + tmp_cols[j];
            du2 += d * d;
        }
        dual = rho * libm::sqrt(du2);

        if primal < best_primal {
            best_primal = primal;
            best_u.copy_from_slice(&u);
        }
        if opts.track_objective {
            let res = residual_norm(a, &u, y, &mut tmp_rows);
            if res <= epsilon + feas_slack {
                best_feasible = best_feasible.min(weighted_l1(&u, weights));
            }
            trace.push(best_feasible);
        }

        if primal <= opts.tol_primal && dual <= opts.tol_dual {
            let res = residual_norm(a, &u, y, &mut tmp_rows);
            if res <= epsilon + feas_slack {
                converged = true;
                best_u.copy_from_slice(&u);
                break;
            }
        }

        if opts.adaptive_rho && rho_updates < MAX_RHO_UPDATES {
            let scale = if primal > BALANCE_RATIO * dual && rho < RHO_MAX {
                RHO_STEP
            } else if dual > BALANCE_RATIO * primal && rho > RHO_MIN {
                1.0 / RHO_STEP
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                rho_updates += 1;
                // scaled duals are λ/ρ
                p.iter_mut().for_each(|e| *e /= scale);
                q.iter_mut().for_each(|e| *e /= scale);
            }
        }
    }

    let solution = if converged { u } else { best_u };
    let constraint_residual = residual_norm(a, &solution, y, &mut tmp_rows);
    Ok(SolveReport {
        objective: weighted_l1(&solution, weights),
        solution,
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        converged,
        final_rho: rho,
        constraint_residual,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::qcbp;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }

    #[test]
    fn ball_projection() {
        let mut v = vec![3.0, 4.0];
        project_ball(&mut v, 1.0);
        assert!((norm2(&v) - 1.0).abs() < 1e-15);
        let mut w = vec![0.1, 0.1];
        project_ball(&mut w, 1.0);
        assert_eq!(w, vec![0.1, 0.1]);
        project_ball(&mut w, 0.0);
        assert_eq!(w, vec![0.0, 0.0]);
    }

    #[test]
    fn identity_equality_forces_rhs() {
        let a = Matrix::identity(3);
        let r = qcbp(&a, &[1.0, 0.0, 0.0], 0.0, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.objective - 1.0).abs() < 1e-8);
        assert!((r.solution[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn line_constraint_objective_is_one() {
        let a = Matrix::from_rows(&[&[1.0, 1.0]]).unwrap();
        let r = qcbp(&a, &[1.0], 0.0, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_is_optimal_inside_the_ball() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        let r = qcbp(&a, &[0.3, 0.4], 0.6, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.objective < 1e-8);
    }

    #[test]
    fn infeasible_epsilon_reported() {
        // rank one: y has a component outside the range
        let a = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let err = qcbp(&a, &[1.0, -1.0], 0.5, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
        // the same system is feasible once the ball reaches the range
        assert!(qcbp(&a, &[1.0, -1.0], 1.5, &SolverOptions::default()).is_ok());
    }

    #[test]
    fn options_are_validated() {
        let a = Matrix::identity(2);
        let mut o = SolverOptions::default();
        o.relaxation = 2.5;
        assert!(qcbp(&a, &[1.0, 0.0], 0.0, &o).is_err());
        let mut o = SolverOptions::default();
        o.max_iter = 0;
        assert!(qcbp(&a, &[1.0, 0.0], 0.0, &o).is_err());
    }

    #[test]
    fn non_convergence_is_flagged() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[0.5, -1.0, 2.0]]).unwrap();
        let opts = SolverOptions {
            max_iter: 3,
            ..SolverOptions::default()
        };
        let r = qcbp(&a, &[1.0, 1.0], 0.0, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
