//! ℓ1 programs behind the estimators.
//!
//! * [`qcbp`]: quadratically constrained basis pursuit
//!   `min ‖u‖_1  s.t.  ‖Au − y‖_2 ≤ ε` (equality when `ε = 0`);
//! * [`weighted_bp_equality`]: `min ‖u‖_1/√s + ‖w‖_1/√(ζ0 m)` subject to
//!   `Ã (u; w) = e1` on the extended system;
//! * [`lp_oracle`]: exact weighted equality-constrained ℓ1 minimizer by
//!   simplex, for small instances only.
//!
//! The first two share one ADMM implementation (see [`admm`]).

mod admm;
mod lp;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure_len, Error, Result};
use crate::linalg::LinearMap;
use crate::linearization::ExtendedSystem;

pub use admm::solve_weighted_l1;
pub use lp::{lp_oracle, ORACLE_MAX_COLS};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Initial ADMM penalty.
    pub rho: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    /// Over-relaxation factor in `[1, 1.9]`.
    pub relaxation: f64,
    /// Rebalance the penalty when primal and dual residuals drift apart.
    pub adaptive_rho: bool,
    /// Residuals are evaluated every this many iterations.
    pub check_every: usize,
    /// Record the best feasible objective at every residual check.
    pub track_objective: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rho: 1.0,
            tol_primal: 1e-9,
            tol_dual: 1e-9,
            max_iter: 50_000,
            relaxation: 1.6,
            adaptive_rho: true,
            check_every: 10,
            track_objective: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return bad("rho", "penalty must be positive");
        }
        if !(self.tol_primal > 0.0) || !(self.tol_dual > 0.0) {
            return bad("tol", "tolerances must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be at least 1");
        }
        if !(1.0..=1.9).contains(&self.relaxation) {
            return bad("relaxation", "must lie in [1, 1.9]");
        }
        if self.check_every == 0 {
            return bad("check_every", "must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
    /// Penalty in effect when the iteration stopped.
    pub final_rho: f64,
    /// Weighted ℓ1 norm of `solution`.
    pub objective: f64,
    /// `‖A·solution − y‖_2`.
    pub constraint_residual: f64,
    /// Best feasible objective so far, one entry per residual check
    /// (only filled when [`SolverOptions::track_objective`] is set).
    pub objective_trace: Vec<f64>,
}

/// `Δ(A; y; ε)`: minimize `‖u‖_1` subject to `‖Au − y‖_2 ≤ ε`.
pub fn qcbp<A: LinearMap + ?Sized>(
    a: &A,
    y: &[f64],
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let weights = vec![1.0; a.cols()];
    solve_weighted_l1(a, y, epsilon, &weights, opts)
}

/// Weighted equality-constrained program on the extended system.
pub fn weighted_bp_equality(system: &ExtendedSystem, opts: &SolverOptions) -> Result<SolveReport> {
    let weights = system.coordinate_weights();
    solve_weighted_l1(system, &system.rhs(), 0.0, &weights, opts)
}

/// Weighted ℓ1 norm `Σ_j w_j |u_j|`.
pub fn weighted_l1(u: &[f64], weights: &[f64]) -> f64 {
    u.iter().zip(weights).map(|(v, w)| w * v.abs()).sum()
}

/// Convenience: run the LP oracle on the dense extended matrix.
pub fn extended_lp_oracle(system: &ExtendedSystem) -> Result<Vec<f64>> {
    lp_oracle(
        &system.to_dense(),
        &system.rhs(),
        &system.coordinate_weights(),
    )
}

pub(crate) fn check_problem<A: LinearMap + ?Sized>(
    a: &A,
    y: &[f64],
    epsilon: f64,
    weights: &[f64],
) -> Result<()> {
    ensure_len("right-hand side", a.rows(), y.len())?;
    ensure_len("weights", a.cols(), weights.len())?;
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::EmptyDimensions {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "must be a finite nonnegative number",
        });
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: "must be finite and positive",
        });
    }
    Ok(())
}
