//! Indistinguishable signal pairs for the dense-noise lower bounds.
//!
//! Given a unit `s`-sparse `x`, build another unit `s`-sparse `x'` at
//! distance about `τ*` whose observations an adversary with budget `τ0`
//! can make identical to those of `x`:
//!
//! * pre-sign: `Φ(x' − x)` is itself an admissible pre-sign perturbation,
//!   so `‖Φ(x' − x)‖_∞ ≤ τ0` is all that is needed;
//! * post-sign: the perturbation `δ` is additionally forced to vanish on
//!   the measurements with `|Φ_i^* x| ≤ s/(4m)`, where a tiny move could
//!   swing the phase arbitrarily.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::SensingMatrix;
use crate::error::{ensure_len, Error, Result};
use crate::linalg::{norm2, null_space, Matrix};
use crate::rng::{stream, streams};
use crate::signal::SignalVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryMode {
    PreSign,
    PostSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndistinguishablePair {
    pub x_prime: SignalVector,
    /// The perturbation `δ` with `x' = (x + δ)/‖x + δ‖`.
    pub delta: Vec<f64>,
    pub tau_star: f64,
    /// Support shared by `x`, `δ` and `x'`.
    pub support: Vec<usize>,
    /// Measurements on which `Φ_i^* δ = 0` was enforced (post mode only).
    pub pinned_measurements: Vec<usize>,
}

/// Target norm of `δ` for the given mode.
pub fn tau_star(mode: AdversaryMode, tau0: f64, m: usize, n: usize, s: usize) -> f64 {
    let log_m = libm::log(m as f64);
    match mode {
        AdversaryMode::PreSign => tau0 / (6.0 * libm::sqrt(log_m)),
        AdversaryMode::PostSign => {
            let log_ens = libm::log(core::f64::consts::E * n as f64 / s as f64);
            let c0 = m as f64 / (s as f64 * log_ens);
            tau0 / (48.0 * c0 * log_ens * libm::sqrt(log_m))
        }
    }
}

pub fn construct_indistinguishable_pair(
    phi: &SensingMatrix,
    x: &SignalVector,
    s: usize,
    tau0: f64,
    mode: AdversaryMode,
    seed: u64,
) -> Result<IndistinguishablePair> {
    let (m, n) = (phi.rows(), phi.cols());
    ensure_len("signal length", n, x.len())?;
    if m < 2 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "need at least two measurements",
        });
    }
    if s == 0 || s > n {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: "sparsity must satisfy 1 <= s <= n",
        });
    }
    if mode == AdversaryMode::PostSign && s < 4 {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: "post-sign construction needs s >= 4",
        });
    }
    if !(tau0 > 0.0) || !tau0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau0",
            reason: "must be a finite positive number",
        });
    }
    if (x.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "signal must have unit norm",
        });
    }
    let mut support = x.support();
    if support.len() > s {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "signal has more than s nonzeros",
        });
    }

    let mut rng = stream(seed, streams::ADVERSARY);
    // pad the support with random unused coordinates up to size s
    if support.len() < s {
        let free: Vec<usize> = (0..n).filter(|j| !support.contains(j)).collect();
        let extra = index::sample(&mut rng, free.len(), s - support.len());
        support.extend(extra.into_iter().map(|j| free[j]));
        support.sort_unstable();
    }

    let pinned: Vec<usize> = match mode {
        AdversaryMode::PreSign => Vec::new(),
        AdversaryMode::PostSign => {
            let eta = s as f64 / (4.0 * m as f64);
            phi.apply(&x.values)?
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm() <= eta)
                .map(|(i, _)| i)
                .collect()
        }
    };

    // constraints on δ restricted to the support: δ ⟂ x, and Φ_i^* δ = 0
    // (real and imaginary parts) for every pinned measurement
    let k = support.len();
    let mut constraints = Matrix::zeros(1 + 2 * pinned.len(), k);
    for (c, &j) in support.iter().enumerate() {
        constraints.set(0, c, x.values[j]);
    }
    for (r, &i) in pinned.iter().enumerate() {
        let row = phi.row(i);
        for (c, &j) in support.iter().enumerate() {
            constraints.set(1 + 2 * r, c, row[j].re);
            constraints.set(2 + 2 * r, c, row[j].im);
        }
    }
    let basis = null_space(&constraints, 1e-10);
    if basis.is_empty() {
        return Err(Error::Infeasible(
            "constraints leave no nonzero perturbation on the support",
        ));
    }

    let mut local = vec![0.0; k];
    while norm2(&local) == 0.0 {
        for b in &basis {
            let g: f64 = rng.sample(StandardNormal);
            for (l, v) in local.iter_mut().zip(b) {
                *l += g * v;
            }
        }
    }
    let t_star = tau_star(mode, tau0, m, n, s);
    let scale = t_star / norm2(&local);
    let mut delta = vec![0.0; n];
    for (c, &j) in support.iter().enumerate() {
        delta[j] = local[c] * scale;
    }

    let shifted: Vec<f64> = x.values.iter().zip(&delta).map(|(a, d)| a + d).collect();
    let x_prime = SignalVector::sparse(shifted, s)?.normalized()?;
    Ok(IndistinguishablePair {
        x_prime,
        delta,
        tau_star: t_star,
        support,
        pinned_measurements: pinned,
    })
}
