//! Complex Gaussian sensing and phase-only observations.
//!
//! A [`SensingMatrix`] `Φ ∈ ℂ^{m×n}` has i.i.d. `N(0,1) + N(0,1)i` entries.
//! Observations keep only the phases `z = sign(Φx)`; the noise channels in
//! [`noise`] perturb them before or after the phase is taken, and
//! [`adversary`] builds the signal pairs that no decoder can tell apart.

pub mod adversary;
pub mod noise;

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_len, Error, Result};
use crate::rng::{stream, streams};

pub use adversary::{construct_indistinguishable_pair, AdversaryMode, IndistinguishablePair};
pub use noise::{
    apply_channel, apply_combined, apply_post_sign_dense, apply_post_sign_perturbation,
    apply_pre_sign_dense, apply_pre_sign_perturbation, apply_sparse_corruption, compose_combined,
    corruption_count, ChannelStep, CombinedPerturbation, Corruption, NoiseSpec,
};

/// Moduli below this are treated as zero by [`phase`].
pub const PHASE_ZERO_THRESHOLD: f64 = 1e-300;

/// Complex Gaussian sensing matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
    seed: u64,
}

impl SensingMatrix {
    /// Draws `m × n` entries with independent standard normal real and
    /// imaginary parts. Deterministic in `seed`.
    pub fn draw(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::EmptyDimensions { rows: m, cols: n });
        }
        let mut rng = stream(seed, streams::MATRIX);
        let entries = (0..m * n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self {
            rows: m,
            cols: n,
            entries,
            seed,
        })
    }

    /// Wraps explicit entries (row-major). The seed is recorded as 0.
    pub fn from_entries(m: usize, n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::EmptyDimensions { rows: m, cols: n });
        }
        ensure_len("sensing matrix entries", m * n, entries.len())?;
        if entries
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidParameter {
                name: "entries",
                reason: "sensing matrix entries must be finite",
            });
        }
        Ok(Self {
            rows: m,
            cols: n,
            entries,
            seed: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Row `i`, i.e. the conjugate of the i-th measurement vector `Φ_i`.
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// `Φx` for a real `x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        ensure_len("signal length", self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|i| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (c, &v) in self.row(i).iter().zip(x) {
                    re += c.re * v;
                    im += c.im * v;
                }
                Complex64::new(re, im)
            })
            .collect())
    }

    /// `‖Φx‖_1 = Σ_i |Φ_i^* x|` with complex moduli.
    pub fn l1_norm_of_image(&self, x: &[f64]) -> Result<f64> {
        Ok(self.apply(x)?.iter().map(|c| c.norm()).sum())
    }
}

/// Phase function: `c/|c|`, and `1` for `c = 0` (moduli below
/// [`PHASE_ZERO_THRESHOLD`] count as zero).
pub fn phase(c: Complex64) -> Complex64 {
    let r = c.norm();
    if !(r >= PHASE_ZERO_THRESHOLD) {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::new(c.re / r, c.im / r)
}

/// Phase-only observations together with how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPhases {
    pub values: Vec<Complex64>,
    /// Channels applied in order; empty for clean observations.
    pub channel: Vec<ChannelStep>,
    /// Indices altered by a sparse corruption, if one was applied.
    pub corruption_support: Option<Vec<usize>>,
}

impl ObservedPhases {
    pub fn clean(values: Vec<Complex64>) -> Self {
        Self {
            values,
            channel: Vec::new(),
            corruption_support: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.channel.is_empty()
    }

    /// `max_i |self_i − other_i|`.
    pub fn max_distance(&self, other: &ObservedPhases) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Clean observations `z = sign(Φx)`.
pub fn observe(phi: &SensingMatrix, x: &[f64]) -> Result<ObservedPhases> {
    let image = phi.apply(x)?;
    Ok(ObservedPhases::clean(
        image.into_iter().map(phase).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn phase_conventions() {
        assert_eq!(phase(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        let p = phase(Complex64::new(3.0, 4.0));
        assert!((p - Complex64::new(0.6, 0.8)).norm() < 1e-15);
        assert_eq!(phase(Complex64::new(-2.0, 0.0)), Complex64::new(-1.0, 0.0));
        assert_eq!(phase(Complex64::new(1e-310, 0.0)), Complex64::new(1.0, 0.0));
        let tiny = phase(Complex64::new(3e-200, -4e-200));
        assert!((tiny.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn draw_is_deterministic_and_seed_sensitive() {
        let a = SensingMatrix::draw(1, 1, 7).unwrap();
        let b = SensingMatrix::draw(1, 1, 7).unwrap();
        assert_eq!(a.entries(), b.entries());
        let c = SensingMatrix::draw(2, 3, 11).unwrap();
        let d = SensingMatrix::draw(2, 3, 12).unwrap();
        assert_ne!(c.entries(), d.entries());
        assert_eq!(c.seed(), 11);
    }

    #[test]
    fn draw_rejects_empty() {
        assert!(matches!(
            SensingMatrix::draw(0, 3, 1),
            Err(Error::EmptyDimensions { .. })
        ));
        assert!(SensingMatrix::draw(3, 0, 1).is_err());
    }

    #[test]
    fn observe_single_entry() {
        let phi = SensingMatrix::from_entries(1, 1, vec![Complex64::new(0.0, 2.0)]).unwrap();
        let z = observe(&phi, &[1.0]).unwrap();
        assert!((z.values[0] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(z.is_clean());
    }

    #[test]
    fn observe_is_scale_invariant_and_unimodular() {
        let phi = SensingMatrix::draw(40, 12, 3).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let z = observe(&phi, &x).unwrap();
        let z2 = observe(&phi, &x2).unwrap();
        assert!(z.max_distance(&z2) < 1e-15);
        assert!(z.values.iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn observe_rejects_wrong_length() {
        let phi = SensingMatrix::draw(4, 3, 1).unwrap();
        assert!(matches!(
            observe(&phi, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
