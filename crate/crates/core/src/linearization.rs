//! Recasting phase-only recovery as real linear compressed sensing.
//!
//! For any `w ∈ ℂ^m` the real `(m+1) × n` matrix
//!
//! ```text
//!        ⎡ Re(w^* Φ) / (κ m)        ⎤
//! A_w =  ⎣ Im(diag(w^*) Φ) / √m     ⎦ ,    κ = √(π/2)
//! ```
//!
//! is linear in `w`. With `w = sign(Φx)` the imaginary rows annihilate `x`
//! and the first row pins its scale, so `A_z x⋆ = e1` for
//! `x⋆ = κ m x / ‖Φx‖_1`. Under sparse corruption the extended matrix
//! `Ã_w = [A_w | (0; I_m)]` absorbs the corruption footprint as a second
//! sparse unknown.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{axpy, norm2, LinearMap, Matrix};
use crate::measurement::SensingMatrix;

/// `√(π/2)`, the mean modulus of a standard complex Gaussian.
pub const KAPPA: f64 = 1.253_314_137_315_500_3;

/// Right-hand side `e1 ∈ ℝ^{len}`.
pub fn e1(len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    if let Some(first) = v.first_mut() {
        *first = 1.0;
    }
    v
}

/// `A_w` together with the noise radius used when solving against `e1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSystem {
    pub matrix: Matrix,
    pub epsilon: f64,
}

impl LinearizedSystem {
    pub fn rhs(&self) -> Vec<f64> {
        e1(self.matrix.nrows())
    }
}

/// Builds `A_w` from `Φ` and `w`.
pub fn build_linearized(
    w: &[Complex64],
    phi: &SensingMatrix,
    epsilon: f64,
) -> Result<LinearizedSystem> {
    let (m, n) = (phi.rows(), phi.cols());
    ensure_len("phase vector", m, w.len())?;
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "must be nonnegative",
        });
    }
    let mut a = Matrix::zeros(m + 1, n);
    let norm_row_scale = 1.0 / (KAPPA * m as f64);
    let im_scale = 1.0 / libm::sqrt(m as f64);
    let mut first = vec![0.0; n];
    for i in 0..m {
        let wc = w[i].conj();
        let row = phi.row(i);
        let out = a.row_mut(i + 1);
        for j in 0..n {
            let p = wc * row[j];
            first[j] += p.re;
            out[j] = p.im * im_scale;
        }
    }
    for (dst, v) in a.row_mut(0).iter_mut().zip(&first) {
        *dst = v * norm_row_scale;
    }
    Ok(LinearizedSystem { matrix: a, epsilon })
}

/// `Ã_w = [A_w | (0; I_m)]` with the identity block kept implicit, plus the
/// block weights `(1/√s, 1/√(ζ0 m))` of the weighted ℓ1 objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSystem {
    pub base: Matrix,
    pub s: usize,
    pub zeta0: f64,
    pub weights: (f64, f64),
}

impl ExtendedSystem {
    pub fn signal_len(&self) -> usize {
        self.base.ncols()
    }

    pub fn corruption_len(&self) -> usize {
        self.base.nrows() - 1
    }

    /// Per-coordinate ℓ1 weights for the stacked unknown `(u; w)`.
    pub fn coordinate_weights(&self) -> Vec<f64> {
        let mut w = vec![self.weights.0; self.signal_len()];
        w.extend(core::iter::repeat_n(self.weights.1, self.corruption_len()));
        w
    }

    pub fn rhs(&self) -> Vec<f64> {
        e1(self.base.nrows())
    }

    /// Materializes the full `(m+1) × (n+m)` matrix.
    pub fn to_dense(&self) -> Matrix {
        let (rows, n) = (self.base.nrows(), self.base.ncols());
        let cols = n + rows - 1;
        let mut d = Matrix::zeros(rows, cols);
        for i in 0..rows {
            d.row_mut(i)[..n].copy_from_slice(self.base.row(i));
            if i > 0 {
                d.set(i, n + i - 1, 1.0);
            }
        }
        d
    }
}

impl LinearMap for ExtendedSystem {
    fn rows(&self) -> usize {
        self.base.nrows()
    }

    fn cols(&self) -> usize {
        self.base.ncols() + self.base.nrows() - 1
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.base.ncols();
        self.base.apply(&x[..n], out);
        axpy(1.0, &x[n..], &mut out[1..]);
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        let n = self.base.ncols();
        self.base.apply_transpose(y, &mut out[..n]);
        out[n..].copy_from_slice(&y[1..]);
    }

    fn outer_gram(&self) -> Matrix {
        let mut g = self.base.outer_gram();
        for i in 1..self.base.nrows() {
            g.set(i, i, g.get(i, i) + 1.0);
        }
        g
    }
}

pub fn build_extended(
    w: &[Complex64],
    phi: &SensingMatrix,
    s: usize,
    zeta0: f64,
) -> Result<ExtendedSystem> {
    if s == 0 {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: "sparsity must be positive",
        });
    }
    let budget = zeta0 * phi.rows() as f64;
    if !(budget >= 1.0 - 1e-9) {
        return Err(Error::InvalidParameter {
            name: "zeta0",
            reason: "zeta0 * m must be at least 1 for the corruption weight",
        });
    }
    let base = build_linearized(w, phi, 0.0)?.matrix;
    Ok(ExtendedSystem {
        base,
        s,
        zeta0,
        weights: (1.0 / libm::sqrt(s as f64), 1.0 / libm::sqrt(budget)),
    })
}

/// Scaled ground truths: `x⋆` always, `(x⋆⋆, x_ζ⋆⋆)` for the extended system.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub x_star: Vec<f64>,
    pub x_star_star: Option<Vec<f64>>,
    pub x_zeta: Option<Vec<f64>>,
}

impl GroundTruth {
    /// `(x⋆⋆; x_ζ⋆⋆)` stacked, if present.
    pub fn stacked_extended(&self) -> Option<Vec<f64>> {
        let mut v = self.x_star_star.clone()?;
        v.extend_from_slice(self.x_zeta.as_ref()?);
        Some(v)
    }
}

/// `x⋆ = κ m x / ‖Φx‖_1`.
pub fn ground_truth_scaled(phi: &SensingMatrix, x: &[f64]) -> Result<GroundTruth> {
    let l1 = phi.l1_norm_of_image(x)?;
    if !(l1 > 0.0) {
        return Err(Error::ZeroSignal);
    }
    let scale = KAPPA * phi.rows() as f64 / l1;
    Ok(GroundTruth {
        x_star: x.iter().map(|v| v * scale).collect(),
        x_star_star: None,
        x_zeta: None,
    })
}

/// Ground truth of the extended system for observations `z̆ = z + ζ`:
/// `x⋆⋆ = κ m x / Re(z̆^* Φ x)` and `x_ζ⋆⋆ = −Im(diag(ζ^*) Φ x⋆⋆)/√m`.
///
/// `x⋆` is filled in as well.
pub fn ground_truth_extended(
    phi: &SensingMatrix,
    x: &[f64],
    observed: &[Complex64],
    zeta: &[Complex64],
) -> Result<GroundTruth> {
    let m = phi.rows();
    ensure_len("observations", m, observed.len())?;
    ensure_len("corruption vector", m, zeta.len())?;
    let base = ground_truth_scaled(phi, x)?;
    let image = phi.apply(x)?;
    let denom: f64 = observed
        .iter()
        .zip(&image)
        .map(|(w, c)| (w.conj() * c).re)
        .sum();
    if !(denom.abs() > 1e-12 * m as f64) {
        return Err(Error::VanishingDenominator(denom));
    }
    let scale = KAPPA * m as f64 / denom;
    let x_ss: Vec<f64> = x.iter().map(|v| v * scale).collect();
    let im_scale = 1.0 / libm::sqrt(m as f64);
    let x_zeta = zeta
        .iter()
        .zip(&image)
        .map(|(d, c)| {
            if d.re == 0.0 && d.im == 0.0 {
                0.0
            } else {
                -(d.conj() * c * scale).im * im_scale
            }
        })
        .collect();
    Ok(GroundTruth {
        x_star: base.x_star,
        x_star_star: Some(x_ss),
        x_zeta: Some(x_zeta),
    })
}

/// `‖A v − e1‖_2`.
pub fn residual<A: LinearMap + ?Sized>(system: &A, v: &[f64]) -> Result<f64> {
    ensure_len("residual input", system.cols(), v.len())?;
    let mut av = vec![0.0; system.rows()];
    system.apply(v, &mut av);
    if let Some(first) = av.first_mut() {
        *first -= 1.0;
    }
    Ok(norm2(&av))
}

/// `σ_ℓ1(x, Σ_s)`: the ℓ1 mass outside the `s` largest-magnitude entries.
pub fn sparsity_defect(x: &[f64], s: usize) -> f64 {
    if s >= x.len() {
        return 0.0;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    mags[..x.len() - s].iter().sum()
}

/// `Re(w^* Φ x) / (κ m)`, the first entry of `A_w x`.
pub fn normalization_row_value(w: &[Complex64], phi: &SensingMatrix, x: &[f64]) -> Result<f64> {
    ensure_len("phase vector", phi.rows(), w.len())?;
    let image = phi.apply(x)?;
    let s: f64 = w.iter().zip(&image).map(|(a, c)| (a.conj() * c).re).sum();
    Ok(s / (KAPPA * phi.rows() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{apply_sparse_corruption, observe, Corruption};
    use crate::rng::{stream, streams};
    use crate::signal::SignalVector;

    fn instance(m: usize, n: usize, s: usize, seed: u64) -> (SensingMatrix, Vec<f64>) {
        let phi = SensingMatrix::draw(m, n, seed).unwrap();
        let x = SignalVector::random_sparse(n, s, &mut stream(seed, streams::SIGNAL)).unwrap();
        (phi, x.values)
    }

    #[test]
    fn kappa_value() {
        assert!((KAPPA - libm::sqrt(core::f64::consts::FRAC_PI_2)).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn zero_phase_vector_gives_zero_matrix() {
        let phi = SensingMatrix::draw(5, 4, 1).unwrap();
        let sys = build_linearized(&[Complex64::new(0.0, 0.0); 5], &phi, 0.0).unwrap();
        assert!(sys.matrix.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hand_evaluated_one_by_one() {
        let phi = SensingMatrix::from_entries(1, 1, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let sys = build_linearized(&[Complex64::new(1.0, 0.0)], &phi, 0.0).unwrap();
        assert_eq!(sys.matrix.nrows(), 2);
        assert!((sys.matrix.get(0, 0) - 1.0 / KAPPA).abs() < 1e-16);
        assert_eq!(sys.matrix.get(1, 0), 0.0);
    }

    #[test]
    fn clean_ground_truth_identity() {
        let (phi, x) = instance(120, 60, 4, 2);
        let z = observe(&phi, &x).unwrap();
        let sys = build_linearized(&z.values, &phi, 0.0).unwrap();
        let gt = ground_truth_scaled(&phi, &x).unwrap();
        assert!(residual(&sys.matrix, &gt.x_star).unwrap() <= 1e-10);
        let l1 = phi.l1_norm_of_image(&x).unwrap();
        assert!((norm2(&gt.x_star) - KAPPA * 120.0 / l1).abs() < 1e-12);
    }

    #[test]
    fn residual_at_zero_is_one() {
        let (phi, x) = instance(20, 10, 2, 3);
        let z = observe(&phi, &x).unwrap();
        let sys = build_linearized(&z.values, &phi, 0.0).unwrap();
        assert!((residual(&sys.matrix, &[0.0; 10]).unwrap() - 1.0).abs() < 1e-15);
        assert!(residual(&sys.matrix, &[0.0; 9]).is_err());
    }

    #[test]
    fn zero_signal_rejected() {
        let phi = SensingMatrix::draw(4, 3, 1).unwrap();
        assert_eq!(
            ground_truth_scaled(&phi, &[0.0; 3]).unwrap_err(),
            Error::ZeroSignal
        );
    }

    #[test]
    fn extended_identity_block_and_shape() {
        let (phi, x) = instance(30, 12, 2, 4);
        let z = observe(&phi, &x).unwrap();
        let ext = build_extended(&z.values, &phi, 2, 2.0 / 30.0).unwrap();
        assert_eq!(ext.cols(), 12 + 30);
        let mut stacked = vec![0.0; 42];
        let v: Vec<f64> = (0..30).map(|i| i as f64 - 3.5).collect();
        stacked[12..].copy_from_slice(&v);
        let mut out = vec![0.0; 31];
        ext.apply(&stacked, &mut out);
        assert_eq!(out[0], 0.0);
        assert_eq!(&out[1..], &v[..]);
        let dense = ext.to_dense();
        assert_eq!(dense.mul_vec(&stacked), out);
        let (gd, ge) = (dense.outer_gram(), ext.outer_gram());
        for (a, b) in gd.as_slice().iter().zip(ge.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        let y: Vec<f64> = (0..31).map(|i| (i as f64).cos()).collect();
        let mut t = vec![0.0; 42];
        ext.apply_transpose(&y, &mut t);
        assert_eq!(t, dense.mul_transpose_vec(&y));
        assert!((ext.weights.0 - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((ext.weights.1 - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn extended_rejects_small_budget() {
        let (phi, x) = instance(30, 12, 2, 4);
        let z = observe(&phi, &x).unwrap();
        assert!(build_extended(&z.values, &phi, 2, 0.01).is_err());
        assert!(build_extended(&z.values, &phi, 0, 0.5).is_err());
    }

    #[test]
    fn extended_ground_truth_reduces_without_corruption() {
        let (phi, x) = instance(40, 20, 3, 5);
        let z = observe(&phi, &x).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); 40];
        let gt = ground_truth_extended(&phi, &x, &z.values, &zero).unwrap();
        let xss = gt.x_star_star.as_ref().unwrap();
        for (a, b) in xss.iter().zip(&gt.x_star) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(gt.x_zeta.as_ref().unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn extended_ground_truth_identity_under_corruption() {
        let (phi, x) = instance(300, 100, 5, 6);
        let z = observe(&phi, &x).unwrap();
        let zb = apply_sparse_corruption(&phi, &x, &z, 5.0 / 300.0, &Corruption::LargestRotateI)
            .unwrap();
        let zeta: Vec<Complex64> = zb
            .values
            .iter()
            .zip(&z.values)
            .map(|(a, b)| a - b)
            .collect();
        let gt = ground_truth_extended(&phi, &x, &zb.values, &zeta).unwrap();
        let ext = build_extended(&zb.values, &phi, 5, 5.0 / 300.0).unwrap();
        let stacked = gt.stacked_extended().unwrap();
        assert!(residual(&ext, &stacked).unwrap() <= 1e-10);
        let support = zb.corruption_support.unwrap();
        for (i, v) in gt.x_zeta.unwrap().iter().enumerate() {
            if *v != 0.0 {
                assert!(support.contains(&i));
            }
        }
    }

    #[test]
    fn sparsity_defect_small_cases() {
        assert_eq!(sparsity_defect(&[3.0, 1.0, -2.0, 0.0], 2), 1.0);
        assert_eq!(sparsity_defect(&[0.0, 5.0, 0.0], 1), 0.0);
        assert_eq!(sparsity_defect(&[1.0, 2.0], 5), 0.0);
        assert_eq!(sparsity_defect(&[1.0, -2.0], 0), 3.0);
    }

    #[test]
    fn linearity_in_w() {
        let phi = SensingMatrix::draw(15, 7, 8).unwrap();
        let w1: Vec<Complex64> = (0..15).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let w2: Vec<Complex64> = (0..15)
            .map(|i| Complex64::new(-0.5, (i as f64).sin()))
            .collect();
        let alpha = -1.7;
        let comb: Vec<Complex64> = w1.iter().zip(&w2).map(|(a, b)| a * alpha + b).collect();
        let a1 = build_linearized(&w1, &phi, 0.0).unwrap().matrix;
        let a2 = build_linearized(&w2, &phi, 0.0).unwrap().matrix;
        let ac = build_linearized(&comb, &phi, 0.0).unwrap().matrix;
        for k in 0..ac.as_slice().len() {
            let expect = alpha * a1.as_slice()[k] + a2.as_slice()[k];
            assert!((ac.as_slice()[k] - expect).abs() <= 1e-12);
        }
    }
}
