//! End-to-end estimators: build the linearized system from observed phases,
//! solve the ℓ1 program, normalize.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{dist2, norm2};
use crate::linearization::{
    build_extended, build_linearized, ground_truth_extended, ground_truth_scaled, residual,
};
use crate::measurement::{observe, NoiseSpec, SensingMatrix};
use crate::solver::{qcbp, weighted_bp_equality, SolveReport, SolverOptions};

/// Below this norm `x̂` is treated as the zero vector.
pub const DEGENERATE_NORM: f64 = 1e-9;

/// Constants of the combined-channel radius
/// `C1 τ0 + C2 √(ζ0 log(e/ζ0)) + C3 √(s log(en/s)/m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for CombinedConstants {
    fn default() -> Self {
        Self {
            c1: 4.0,
            c2: 11.0,
            c3: 3.0,
        }
    }
}

/// How the constraint radius ε is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonMode {
    /// Radii from the robustness guarantees of each channel.
    Theorem(CombinedConstants),
    /// The smallest radius keeping the scaled truth feasible, `‖A_z̆ x⋆ − e1‖_2`.
    /// Requires the true signal.
    Oracle,
}

/// `ζ0 log(e/ζ0)`, with value 0 at `ζ0 = 0`.
fn entropy_term(zeta0: f64) -> f64 {
    if zeta0 <= 0.0 {
        0.0
    } else {
        zeta0 * libm::log(core::f64::consts::E / zeta0)
    }
}

/// Theorem-mode radius for `spec` (`None` means clean observations).
pub fn epsilon_theorem(
    spec: Option<&NoiseSpec>,
    m: usize,
    n: usize,
    s: usize,
    constants: &CombinedConstants,
) -> f64 {
    match spec {
        None => 0.0,
        Some(NoiseSpec::PostSignDense { tau0 }) => 2.5 * tau0,
        Some(NoiseSpec::PreSignDense { tau0 }) => 4.0 * tau0,
        Some(NoiseSpec::SparseCorruption { zeta0, .. }) => 11.0 * entropy_term(*zeta0),
        Some(NoiseSpec::Combined { tau0, zeta0 }) => {
            let (m, n, s) = (m as f64, n as f64, s as f64);
            let sample_term = libm::sqrt(s * libm::log(core::f64::consts::E * n / s) / m);
            constants.c1 * tau0
                + constants.c2 * libm::sqrt(entropy_term(*zeta0))
                + constants.c3 * sample_term
        }
    }
}

/// Oracle radius `‖A_z̆ x⋆ − e1‖_2`.
pub fn epsilon_oracle(phi: &SensingMatrix, observed: &[Complex64], x: &[f64]) -> Result<f64> {
    let truth = ground_truth_scaled(phi, x)?;
    let sys = build_linearized(observed, phi, 0.0)?;
    residual(&sys.matrix, &truth.x_star)
}

/// One recovery problem: sensing matrix, observed phases, and optionally
/// the true unit signal for oracle radii and error reporting.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryInput<'a> {
    pub phi: &'a SensingMatrix,
    pub observed: &'a [Complex64],
    pub truth: Option<&'a [f64]>,
}

impl<'a> RecoveryInput<'a> {
    fn check(&self) -> Result<()> {
        ensure_len("observations", self.phi.rows(), self.observed.len())?;
        if let Some(x) = self.truth {
            ensure_len("true signal", self.phi.cols(), x.len())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Solver output restricted to the signal coordinates.
    pub x_hat: Vec<f64>,
    /// `x̂/‖x̂‖_2`, or zero when `x̂` vanishes.
    pub x_sharp: Vec<f64>,
    pub epsilon_used: f64,
    /// Residual of the scaled truth in the solved system.
    pub residual_at_truth: Option<f64>,
    pub l2_error: Option<f64>,
    /// `x̂` vanished, so `x_sharp` is the zero vector.
    pub degenerate: bool,
    pub solve: SolveReport,
    /// Corruption block of the extended solve.
    pub corruption_estimate: Option<Vec<f64>>,
}

fn normalize(x_hat: &[f64]) -> (Vec<f64>, bool) {
    let nrm = norm2(x_hat);
    if nrm <= DEGENERATE_NORM {
        (vec![0.0; x_hat.len()], true)
    } else {
        (x_hat.iter().map(|v| v / nrm).collect(), false)
    }
}

/// Chooses the radius for `spec` under `mode`.
pub fn epsilon_for(
    input: &RecoveryInput<'_>,
    spec: Option<&NoiseSpec>,
    mode: &EpsilonMode,
    s: usize,
) -> Result<f64> {
    input.check()?;
    match mode {
        EpsilonMode::Theorem(c) => Ok(epsilon_theorem(
            spec,
            input.phi.rows(),
            input.phi.cols(),
            s,
            c,
        )),
        EpsilonMode::Oracle => {
            let x = input.truth.ok_or(Error::InvalidParameter {
                name: "epsilon_mode",
                reason: "oracle radius needs the true signal",
            })?;
            epsilon_oracle(input.phi, input.observed, x)
        }
    }
}

/// Standard estimator: `x̂ = Δ(A_z̆; e1; ε)`, `x♯ = x̂/‖x̂‖_2`.
pub fn recover(
    input: &RecoveryInput<'_>,
    spec: Option<&NoiseSpec>,
    mode: &EpsilonMode,
    s: usize,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    let epsilon = epsilon_for(input, spec, mode, s)?;
    recover_with_epsilon(input, epsilon, opts)
}

/// Standard estimator at a caller-chosen radius.
pub fn recover_with_epsilon(
    input: &RecoveryInput<'_>,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    input.check()?;
    let sys = build_linearized(input.observed, input.phi, epsilon)?;
    let solve = qcbp(&sys.matrix, &sys.rhs(), epsilon, opts)?;
    let x_hat = solve.solution.clone();
    let (x_sharp, degenerate) = normalize(&x_hat);
    let (residual_at_truth, l2_error) = match input.truth {
        Some(x) => {
            let truth = ground_truth_scaled(input.phi, x)?;
            (
                Some(residual(&sys.matrix, &truth.x_star)?),
                Some(dist2(&x_sharp, x)),
            )
        }
        None => (None, None),
    };
    Ok(RecoveryResult {
        x_hat,
        x_sharp,
        epsilon_used: epsilon,
        residual_at_truth,
        l2_error,
        degenerate,
        solve,
        corruption_estimate: None,
    })
}

/// Corruption-aware estimator on `Ã_z̆`; falls back to noiseless basis
/// pursuit when `ζ0 = 0`.
pub fn recover_extended(
    input: &RecoveryInput<'_>,
    s: usize,
    zeta0: f64,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    input.check()?;
    if zeta0 == 0.0 {
        return recover_with_epsilon(input, 0.0, opts);
    }
    let sys = build_extended(input.observed, input.phi, s, zeta0)?;
    let solve = weighted_bp_equality(&sys, opts)?;
    let n = sys.signal_len();
    let x_hat = solve.solution[..n].to_vec();
    let corruption = solve.solution[n..].to_vec();
    let (x_sharp, degenerate) = normalize(&x_hat);
    let (residual_at_truth, l2_error) = match input.truth {
        Some(x) => {
            let clean = observe(input.phi, x)?;
            let zeta: Vec<Complex64> = input
                .observed
                .iter()
                .zip(&clean.values)
                .map(|(o, c)| o - c)
                .collect();
            let truth = ground_truth_extended(input.phi, x, input.observed, &zeta)?;
            let stacked = truth
                .stacked_extended()
                .expect("extended ground truth carries both blocks");
            (Some(residual(&sys, &stacked)?), Some(dist2(&x_sharp, x)))
        }
        None => (None, None),
    };
    Ok(RecoveryResult {
        x_hat,
        x_sharp,
        epsilon_used: 0.0,
        residual_at_truth,
        l2_error,
        degenerate,
        solve,
        corruption_estimate: Some(corruption),
    })
}
