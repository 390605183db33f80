//! Backends of the `rip-check` and `adversary` subcommands.

use pocs_core::diagnostics::{rip_exhaustive, rip_monte_carlo, RipCone, RipMethod};
use pocs_core::linalg::dist2;
use pocs_core::linearization::build_linearized;
use pocs_core::measurement::{
    construct_indistinguishable_pair, observe, AdversaryMode, SensingMatrix,
};
use pocs_core::rng::{stream, streams, trial_seed};
use pocs_core::signal::SignalVector;
use serde::Serialize;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RipCheck {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    /// Sparsity level of the cone.
    pub t: usize,
    pub samples: usize,
    pub seed: u64,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RipReport {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub delta: f64,
    pub method: String,
    pub certified: bool,
    pub within_one_third: bool,
}

/// Distortion of `A_z` for clean phases of a random `s`-sparse signal.
pub fn rip_check(c: &RipCheck) -> Result<RipReport> {
    let phi = SensingMatrix::draw(c.m, c.n, c.seed).map_err(LabError::from_params)?;
    let x = SignalVector::random_sparse(c.n, c.s, &mut stream(c.seed, streams::SIGNAL))
        .map_err(LabError::from_params)?;
    let z = observe(&phi, &x.values)?;
    let a = build_linearized(&z.values, &phi, 0.0)?.matrix;
    let cone = RipCone::Sparse { t: c.t };
    let est = if c.exhaustive {
        rip_exhaustive(&a, cone)
    } else {
        rip_monte_carlo(&a, cone, c.samples, c.seed)
    }
    .map_err(LabError::from_params)?;
    Ok(RipReport {
        n: c.n,
        m: c.m,
        t: c.t,
        delta: est.delta,
        method: match est.method {
            RipMethod::Exhaustive => "exhaustive".to_string(),
            RipMethod::MonteCarlo { samples } => format!("monte-carlo({samples})"),
        },
        certified: est.certified,
        within_one_third: est.delta <= 1.0 / 3.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryRun {
    pub mode: AdversaryMode,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub tau0: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryTrial {
    pub trial: usize,
    pub feasible: bool,
    pub tau_star: f64,
    /// `‖x' − x‖_2`.
    pub distance: f64,
    /// `‖Φ(x' − x)‖_∞`.
    pub image_gap: f64,
    /// `‖sign(Φx') − sign(Φx)‖_∞`.
    pub phase_gap: f64,
}

impl AdversaryTrial {
    /// Pre-sign success: the image gap fits the budget and the pair is at
    /// least `τ0/(12√log m)` apart.
    pub fn pre_sign_ok(&self, tau0: f64, m: usize) -> bool {
        self.feasible
            && self.image_gap <= tau0
            && self.distance >= tau0 / (12.0 * (m as f64).ln().sqrt())
    }

    pub fn post_sign_ok(&self, tau0: f64) -> bool {
        self.feasible && self.phase_gap <= tau0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryReport {
    pub mode: String,
    pub tau0: f64,
    pub feasible: usize,
    /// Trials meeting the mode's indistinguishability conditions.
    pub successes: usize,
    pub trials: Vec<AdversaryTrial>,
}

/// Builds one pair per trial. Trials where the construction is infeasible
/// are kept as such; any other error aborts.
pub fn adversary_trials(run: &AdversaryRun) -> Result<AdversaryReport> {
    let trials = (0..run.trials)
        .map(|t| {
            let seed = trial_seed(run.seed, t as u64);
            let attempt = (|| {
                let phi = SensingMatrix::draw(run.m, run.n, seed)?;
                let x =
                    SignalVector::random_sparse(run.n, run.s, &mut stream(seed, streams::SIGNAL))?;
                let pair =
                    construct_indistinguishable_pair(&phi, &x, run.s, run.tau0, run.mode, seed)?;
                let diff: Vec<f64> = pair
                    .x_prime
                    .values
                    .iter()
                    .zip(&x.values)
                    .map(|(a, b)| a - b)
                    .collect();
                let image = phi.apply(&diff)?;
                let image_gap = image.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
                let phase_gap =
                    observe(&phi, &pair.x_prime.values)?.max_distance(&observe(&phi, &x.values)?);
                Ok::<_, pocs_core::Error>(AdversaryTrial {
                    trial: t,
                    feasible: true,
                    tau_star: pair.tau_star,
                    distance: dist2(&pair.x_prime.values, &x.values),
                    image_gap,
                    phase_gap,
                })
            })();
            match attempt {
                Err(pocs_core::Error::Infeasible(_)) => Ok(AdversaryTrial {
                    trial: t,
                    feasible: false,
                    tau_star: f64::NAN,
                    distance: f64::NAN,
                    image_gap: f64::NAN,
                    phase_gap: f64::NAN,
                }),
                other => other,
            }
        })
        .collect::<pocs_core::Result<Vec<AdversaryTrial>>>()
        .map_err(LabError::from_params)?;
    let successes = trials
        .iter()
        .filter(|t| match run.mode {
            AdversaryMode::PreSign => t.pre_sign_ok(run.tau0, run.m),
            AdversaryMode::PostSign => t.post_sign_ok(run.tau0),
        })
        .count();
    Ok(AdversaryReport {
        mode: match run.mode {
            AdversaryMode::PreSign => "pre".into(),
            AdversaryMode::PostSign => "post".into(),
        },
        tau0: run.tau0,
        feasible: trials.iter().filter(|t| t.feasible).count(),
        successes,
        trials,
    })
}
