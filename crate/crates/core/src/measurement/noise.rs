//! Noise and corruption channels on phase observations.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;

use super::{observe, phase, ObservedPhases, SensingMatrix};
use crate::error::{ensure_len, Error, Result};
use crate::rng::{stream, streams};

const BOUND_SLACK: f64 = 1e-12;

/// Sparse corruption mechanism.
#[derive(Debug, Clone, PartialEq)]
pub enum Corruption {
    /// Rotate by `i` the `k` observations with the largest `|Φ_i^* x|`.
    LargestRotateI,
    /// Add this vector to `z`; it must be `k`-sparse with entries of modulus ≤ 2.
    Explicit(Vec<Complex64>),
}

/// Noise model for one experiment channel.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    PostSignDense { tau0: f64 },
    PreSignDense { tau0: f64 },
    SparseCorruption { zeta0: f64, mechanism: Corruption },
    Combined { tau0: f64, zeta0: f64 },
}

impl NoiseSpec {
    pub fn tau0(&self) -> f64 {
        match self {
            NoiseSpec::PostSignDense { tau0 }
            | NoiseSpec::PreSignDense { tau0 }
            | NoiseSpec::Combined { tau0, .. } => *tau0,
            NoiseSpec::SparseCorruption { .. } => 0.0,
        }
    }

    pub fn zeta0(&self) -> f64 {
        match self {
            NoiseSpec::SparseCorruption { zeta0, .. } | NoiseSpec::Combined { zeta0, .. } => *zeta0,
            _ => 0.0,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let tau0 = self.tau0();
        if !(tau0 >= 0.0) || !tau0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "tau0",
                reason: "must be a finite nonnegative number",
            });
        }
        if let NoiseSpec::PostSignDense { tau0 } = self {
            check_rotation_bound(*tau0)?;
        }
        let zeta0 = self.zeta0();
        if !(0.0..=1.0).contains(&zeta0) {
            return Err(Error::InvalidParameter {
                name: "zeta0",
                reason: "must lie in [0, 1]",
            });
        }
        if let NoiseSpec::SparseCorruption {
            mechanism: Corruption::Explicit(v),
            ..
        } = self
        {
            ensure_len("explicit corruption", m, v.len())?;
        }
        Ok(())
    }
}

/// One applied channel, recorded on [`ObservedPhases`].
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelStep {
    PostSignDense {
        tau0: f64,
    },
    PreSignDense {
        tau0: f64,
    },
    PreSignPerturbation,
    PostSignPerturbation,
    SparseCorruption {
        zeta0: f64,
        count: usize,
        explicit: bool,
    },
    Combined(Box<CombinedPerturbation>),
}

/// Number of corrupted entries `k = ⌈ζ0·m⌉`.
///
/// A relative slack of 1e-9 absorbs the rounding in `ζ0 = k/m`, so that
/// `13/300 · 300` counts as 13 rather than 14.
pub fn corruption_count(zeta0: f64, m: usize) -> usize {
    let raw = zeta0 * m as f64;
    let k = libm::ceil(raw - 1e-9 * raw.max(1.0));
    (k.max(0.0) as usize).min(m)
}

fn check_rotation_bound(tau0: f64) -> Result<()> {
    if tau0 > SQRT_2 + BOUND_SLACK {
        return Err(Error::InvalidParameter {
            name: "tau0",
            reason: "post-sign rotation needs tau0 <= sqrt(2)",
        });
    }
    Ok(())
}

/// Rotates every phase by `θ0 = 2 arcsin(τ0/2)`, the angle whose chord
/// `|e^{iθ0} − 1|` equals `τ0`.
pub fn apply_post_sign_dense(z: &ObservedPhases, tau0: f64) -> Result<ObservedPhases> {
    if !(tau0 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau0",
            reason: "must be nonnegative",
        });
    }
    check_rotation_bound(tau0)?;
    let theta = 2.0 * libm::asin((tau0 / 2.0).min(SQRT_2 / 2.0));
    let rot = Complex64::new(libm::cos(theta), libm::sin(theta));
    let mut out = z.clone();
    out.values.iter_mut().for_each(|v| *v *= rot);
    out.channel.push(ChannelStep::PostSignDense { tau0 });
    Ok(out)
}

/// `z̆ = z + τ` for an arbitrary post-sign perturbation `τ`.
pub fn apply_post_sign_perturbation(
    z: &ObservedPhases,
    perturbation: &[Complex64],
) -> Result<ObservedPhases> {
    ensure_len("post-sign perturbation", z.len(), perturbation.len())?;
    let mut out = z.clone();
    for (v, d) in out.values.iter_mut().zip(perturbation) {
        *v += d;
    }
    out.channel.push(ChannelStep::PostSignPerturbation);
    Ok(out)
}

/// `z̆ = sign(Φx + τ0·i·sign(Φx))`: a pre-sign push of modulus exactly `τ0`
/// orthogonal to each measurement.
pub fn apply_pre_sign_dense(phi: &SensingMatrix, x: &[f64], tau0: f64) -> Result<ObservedPhases> {
    if !(tau0 >= 0.0) || !tau0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau0",
            reason: "must be a finite nonnegative number",
        });
    }
    let image = phi.apply(x)?;
    let i_unit = Complex64::new(0.0, 1.0);
    let values = image
        .iter()
        .map(|&c| phase(c + i_unit * phase(c) * tau0))
        .collect();
    Ok(ObservedPhases {
        values,
        channel: vec![ChannelStep::PreSignDense { tau0 }],
        corruption_support: None,
    })
}

/// `z̆ = sign(Φx + δ)` for an arbitrary pre-sign perturbation `δ`.
pub fn apply_pre_sign_perturbation(
    phi: &SensingMatrix,
    x: &[f64],
    perturbation: &[Complex64],
) -> Result<ObservedPhases> {
    ensure_len("pre-sign perturbation", phi.rows(), perturbation.len())?;
    let image = phi.apply(x)?;
    let values = image
        .iter()
        .zip(perturbation)
        .map(|(&c, &d)| phase(c + d))
        .collect();
    Ok(ObservedPhases {
        values,
        channel: vec![ChannelStep::PreSignPerturbation],
        corruption_support: None,
    })
}

/// Indices of the `k` largest `|Φ_i^* x|`, ties broken by lower index.
fn largest_measurements(image: &[Complex64], k: usize) -> Vec<usize> {
    let moduli: Vec<f64> = image.iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..image.len()).collect();
    order.sort_by(|&a, &b| moduli[b].total_cmp(&moduli[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Sparse post-sign corruption `z̆ = z + ζ` with `‖ζ‖_0 ≤ ⌈ζ0·m⌉`.
pub fn apply_sparse_corruption(
    phi: &SensingMatrix,
    x: &[f64],
    z: &ObservedPhases,
    zeta0: f64,
    mechanism: &Corruption,
) -> Result<ObservedPhases> {
    let m = phi.rows();
    ensure_len("observations", m, z.len())?;
    if !(0.0..=1.0).contains(&zeta0) {
        return Err(Error::InvalidParameter {
            name: "zeta0",
            reason: "must lie in [0, 1]",
        });
    }
    let k = corruption_count(zeta0, m);
    let mut out = z.clone();
    let support = match mechanism {
        Corruption::LargestRotateI => {
            let image = phi.apply(x)?;
            let support = largest_measurements(&image, k);
            let i_unit = Complex64::new(0.0, 1.0);
            for &i in &support {
                out.values[i] *= i_unit;
            }
            support
        }
        Corruption::Explicit(zeta) => {
            ensure_len("explicit corruption", m, zeta.len())?;
            validate_sparse_vector(zeta, k, Some(2.0))?;
            for (v, d) in out.values.iter_mut().zip(zeta) {
                *v += d;
            }
            nonzero_indices(zeta)
        }
    };
    out.channel.push(ChannelStep::SparseCorruption {
        zeta0,
        count: support.len(),
        explicit: matches!(mechanism, Corruption::Explicit(_)),
    });
    out.corruption_support = Some(support);
    Ok(out)
}

fn nonzero_indices(v: &[Complex64]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(i, _)| i)
        .collect()
}

fn validate_sparse_vector(v: &[Complex64], allowed: usize, bound: Option<f64>) -> Result<()> {
    let found = nonzero_indices(v).len();
    if found > allowed {
        return Err(Error::CorruptionTooDense { found, allowed });
    }
    if let Some(bound) = bound {
        if let Some((index, c)) = v
            .iter()
            .enumerate()
            .find(|(_, c)| c.norm() > bound + BOUND_SLACK)
        {
            return Err(Error::CorruptionTooLarge {
                index,
                modulus: c.norm(),
                bound,
            });
        }
    }
    Ok(())
}

/// The four components of the combined channel
/// `z̆ = sign(Φx + τ_(1) + ζ_(1)) + τ_(2) + ζ_(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedPerturbation {
    pub tau0: f64,
    pub zeta0: f64,
    pub tau_pre: Vec<Complex64>,
    pub zeta_pre: Vec<Complex64>,
    pub tau_post: Vec<Complex64>,
    pub zeta_post: Vec<Complex64>,
}

fn unit_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let t: f64 = rng.gen_range(0.0..2.0 * PI);
    Complex64::new(libm::cos(t), libm::sin(t))
}

impl CombinedPerturbation {
    /// Default adversary: dense terms `τ0·e^{iθ}` with uniform `θ` on every
    /// entry; two disjoint uniform supports of size `k = ⌈ζ0·m⌉`. The
    /// pre-sign corruption replaces `Φ_i^* x` by a point of modulus
    /// `|Φ_i^* x| + 1` at a uniform phase, and the post-sign corruption
    /// moves the observed phase to a fresh uniform phase.
    pub fn draw<R: Rng + ?Sized>(
        phi: &SensingMatrix,
        x: &[f64],
        tau0: f64,
        zeta0: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let m = phi.rows();
        NoiseSpec::Combined { tau0, zeta0 }.validate(m)?;
        let k = corruption_count(zeta0, m);
        if 2 * k > m {
            return Err(Error::InvalidParameter {
                name: "zeta0",
                reason: "two disjoint corruption supports do not fit in m measurements",
            });
        }
        let image = phi.apply(x)?;
        let tau_pre: Vec<Complex64> = (0..m).map(|_| unit_phase(rng) * tau0).collect();
        let tau_post: Vec<Complex64> = (0..m).map(|_| unit_phase(rng) * tau0).collect();

        let pre_support = index::sample(rng, m, k).into_vec();
        let mut taken = vec![false; m];
        for &i in &pre_support {
            taken[i] = true;
        }
        // uniform over supports disjoint from the first one
        let free: Vec<usize> = (0..m).filter(|&i| !taken[i]).collect();
        let post_support: Vec<usize> = index::sample(rng, free.len(), k)
            .into_iter()
            .map(|j| free[j])
            .collect();

        let zero = Complex64::new(0.0, 0.0);
        let mut zeta_pre = vec![zero; m];
        for &i in &pre_support {
            let target = unit_phase(rng) * (image[i].norm() + 1.0);
            zeta_pre[i] = target - image[i];
        }
        let mut zeta_post = vec![zero; m];
        for &i in &post_support {
            let signed = phase(image[i] + tau_pre[i] + zeta_pre[i]);
            zeta_post[i] = unit_phase(rng) - signed;
        }
        Ok(Self {
            tau0,
            zeta0,
            tau_pre,
            zeta_pre,
            tau_post,
            zeta_post,
        })
    }

    fn validate(&self, m: usize) -> Result<()> {
        for v in [
            &self.tau_pre,
            &self.zeta_pre,
            &self.tau_post,
            &self.zeta_post,
        ] {
            ensure_len("combined component", m, v.len())?;
        }
        let k = corruption_count(self.zeta0, m);
        for tau in [&self.tau_pre, &self.tau_post] {
            if let Some((index, c)) = tau
                .iter()
                .enumerate()
                .find(|(_, c)| c.norm() > self.tau0 + BOUND_SLACK)
            {
                return Err(Error::CorruptionTooLarge {
                    index,
                    modulus: c.norm(),
                    bound: self.tau0,
                });
            }
        }
        validate_sparse_vector(&self.zeta_pre, k, None)?;
        validate_sparse_vector(&self.zeta_post, k, Some(2.0))?;
        let pre = nonzero_indices(&self.zeta_pre);
        if nonzero_indices(&self.zeta_post)
            .iter()
            .any(|i| pre.binary_search(i).is_ok())
        {
            return Err(Error::InvalidParameter {
                name: "zeta",
                reason: "pre- and post-sign corruption supports must be disjoint",
            });
        }
        Ok(())
    }
}

/// Applies explicit combined-channel components after validating their bounds.
pub fn apply_combined(
    phi: &SensingMatrix,
    x: &[f64],
    components: &CombinedPerturbation,
) -> Result<ObservedPhases> {
    let m = phi.rows();
    components.validate(m)?;
    let image = phi.apply(x)?;
    let values = (0..m)
        .map(|i| {
            phase(image[i] + components.tau_pre[i] + components.zeta_pre[i])
                + components.tau_post[i]
                + components.zeta_post[i]
        })
        .collect();
    let mut support = nonzero_indices(&components.zeta_pre);
    support.extend(nonzero_indices(&components.zeta_post));
    support.sort_unstable();
    Ok(ObservedPhases {
        values,
        channel: vec![ChannelStep::Combined(Box::new(components.clone()))],
        corruption_support: Some(support),
    })
}

/// Draws the default combined adversary from `seed` and applies it.
pub fn compose_combined(
    phi: &SensingMatrix,
    x: &[f64],
    tau0: f64,
    zeta0: f64,
    seed: u64,
) -> Result<ObservedPhases> {
    let mut rng = stream(seed, streams::CHANNEL);
    let components = CombinedPerturbation::draw(phi, x, tau0, zeta0, &mut rng)?;
    apply_combined(phi, x, &components)
}

/// Produces observations of `x` through `spec`, drawing any randomness the
/// channel needs from `rng`.
pub fn apply_channel<R: Rng + ?Sized>(
    phi: &SensingMatrix,
    x: &[f64],
    spec: Option<&NoiseSpec>,
    rng: &mut R,
) -> Result<ObservedPhases> {
    let Some(spec) = spec else {
        return observe(phi, x);
    };
    spec.validate(phi.rows())?;
    match spec {
        NoiseSpec::PostSignDense { tau0 } => apply_post_sign_dense(&observe(phi, x)?, *tau0),
        NoiseSpec::PreSignDense { tau0 } => apply_pre_sign_dense(phi, x, *tau0),
        NoiseSpec::SparseCorruption { zeta0, mechanism } => {
            apply_sparse_corruption(phi, x, &observe(phi, x)?, *zeta0, mechanism)
        }
        NoiseSpec::Combined { tau0, zeta0 } => {
            let components = CombinedPerturbation::draw(phi, x, *tau0, *zeta0, rng)?;
            apply_combined(phi, x, &components)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SignalVector;

    fn instance(m: usize, n: usize, seed: u64) -> (SensingMatrix, Vec<f64>) {
        let phi = SensingMatrix::draw(m, n, seed).unwrap();
        let mut rng = stream(seed, streams::SIGNAL);
        let x = SignalVector::random_sparse(n, 3.min(n), &mut rng).unwrap();
        (phi, x.values)
    }

    #[test]
    fn corruption_count_rounds_up_but_not_on_exact_ratios() {
        assert_eq!(corruption_count(13.0 / 300.0, 300), 13);
        assert_eq!(corruption_count(0.0, 300), 0);
        assert_eq!(corruption_count(0.0101, 300), 4);
        assert_eq!(corruption_count(1.0, 7), 7);
        for k in 0..=300 {
            assert_eq!(corruption_count(k as f64 / 300.0, 300), k);
        }
    }

    #[test]
    fn post_sign_rotation_chord_length() {
        let (phi, x) = instance(50, 10, 1);
        let z = observe(&phi, &x).unwrap();
        assert_eq!(apply_post_sign_dense(&z, 0.0).unwrap().values, z.values);
        let quarter = apply_post_sign_dense(&z, SQRT_2).unwrap();
        for (a, b) in quarter.values.iter().zip(&z.values) {
            assert!((a - b * Complex64::new(0.0, 1.0)).norm() < 1e-12);
        }
        let zb = apply_post_sign_dense(&z, 0.04).unwrap();
        assert!((zb.max_distance(&z) - 0.04).abs() < 1e-12);
        assert!(zb.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        assert!(apply_post_sign_dense(&z, 1.5).is_err());
    }

    #[test]
    fn pre_sign_single_entry() {
        let phi = SensingMatrix::from_entries(1, 1, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let z = apply_pre_sign_dense(&phi, &[1.0], 1.0).unwrap();
        let expect = Complex64::new(1.0, 1.0) / SQRT_2;
        assert!((z.values[0] - expect).norm() < 1e-15);
        let clean = apply_pre_sign_dense(&phi, &[1.0], 0.0).unwrap();
        assert_eq!(clean.values[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn pre_sign_respects_entrywise_phase_bound() {
        let (phi, x) = instance(300, 40, 2);
        let z = observe(&phi, &x).unwrap();
        let image = phi.apply(&x).unwrap();
        for &tau0 in &[0.04, 0.3, 0.84] {
            let zb = apply_pre_sign_dense(&phi, &x, tau0).unwrap();
            for i in 0..300 {
                let bound = (2.0 * tau0 / image[i].norm()).min(2.0);
                assert!((zb.values[i] - z.values[i]).norm() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn largest_rotate_i_picks_largest_moduli() {
        // |Φ_i x| = 1, 2, 3, 5 for x = [1]; the largest is index 3
        let entries = [1.0, 2.0, 3.0, 5.0]
            .iter()
            .map(|&r| Complex64::new(0.0, r))
            .collect();
        let phi = SensingMatrix::from_entries(4, 1, entries).unwrap();
        let z = observe(&phi, &[1.0]).unwrap();
        let zb =
            apply_sparse_corruption(&phi, &[1.0], &z, 0.25, &Corruption::LargestRotateI).unwrap();
        assert_eq!(zb.corruption_support.as_deref(), Some(&[3usize][..]));
        for i in 0..3 {
            assert_eq!(zb.values[i], z.values[i]);
        }
        assert!((zb.values[3] - z.values[3] * Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let entries = vec![Complex64::new(2.0, 0.0); 4];
        let phi = SensingMatrix::from_entries(4, 1, entries).unwrap();
        let z = observe(&phi, &[1.0]).unwrap();
        let zb =
            apply_sparse_corruption(&phi, &[1.0], &z, 0.5, &Corruption::LargestRotateI).unwrap();
        assert_eq!(zb.corruption_support.as_deref(), Some(&[0usize, 1][..]));
    }

    #[test]
    fn corruption_counts_at_reference_scale() {
        let (phi, x) = instance(300, 60, 4);
        let z = observe(&phi, &x).unwrap();
        let none = apply_sparse_corruption(&phi, &x, &z, 0.0, &Corruption::LargestRotateI).unwrap();
        assert_eq!(none.values, z.values);
        assert_eq!(none.corruption_support.as_deref(), Some(&[][..]));
        let zb = apply_sparse_corruption(&phi, &x, &z, 13.0 / 300.0, &Corruption::LargestRotateI)
            .unwrap();
        let changed = zb
            .values
            .iter()
            .zip(&z.values)
            .filter(|(a, b)| (*a - *b).norm() > 0.0)
            .count();
        assert_eq!(changed, 13);
        assert!(zb.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn explicit_corruption_is_validated() {
        let (phi, x) = instance(10, 5, 5);
        let z = observe(&phi, &x).unwrap();
        let mut zeta = vec![Complex64::new(0.0, 0.0); 10];
        zeta[2] = Complex64::new(0.0, 1.5);
        let ok = apply_sparse_corruption(&phi, &x, &z, 0.1, &Corruption::Explicit(zeta.clone()))
            .unwrap();
        assert_eq!(ok.corruption_support.as_deref(), Some(&[2usize][..]));
        zeta[4] = Complex64::new(0.5, 0.0);
        assert_eq!(
            apply_sparse_corruption(&phi, &x, &z, 0.1, &Corruption::Explicit(zeta.clone()))
                .unwrap_err(),
            Error::CorruptionTooDense {
                found: 2,
                allowed: 1
            }
        );
        let mut big = vec![Complex64::new(0.0, 0.0); 10];
        big[0] = Complex64::new(2.5, 0.0);
        assert!(matches!(
            apply_sparse_corruption(&phi, &x, &z, 0.1, &Corruption::Explicit(big)),
            Err(Error::CorruptionTooLarge { index: 0, .. })
        ));
    }

    #[test]
    fn combined_degenerates_to_clean() {
        let (phi, x) = instance(60, 20, 6);
        let z = observe(&phi, &x).unwrap();
        let zb = compose_combined(&phi, &x, 0.0, 0.0, 9).unwrap();
        assert!(zb.max_distance(&z) < 1e-15);
    }

    #[test]
    fn combined_dense_matches_sequential_application() {
        let (phi, x) = instance(80, 20, 7);
        let mut rng = stream(3, streams::CHANNEL);
        let comps = CombinedPerturbation::draw(&phi, &x, 0.1, 0.0, &mut rng).unwrap();
        let combined = apply_combined(&phi, &x, &comps).unwrap();
        let pre = apply_pre_sign_perturbation(&phi, &x, &comps.tau_pre).unwrap();
        let seq = apply_post_sign_perturbation(&pre, &comps.tau_post).unwrap();
        assert!(combined.max_distance(&seq) < 1e-15);
    }

    #[test]
    fn combined_rejects_oversized_components() {
        let (phi, x) = instance(20, 5, 8);
        let mut rng = stream(4, streams::CHANNEL);
        let mut comps = CombinedPerturbation::draw(&phi, &x, 0.1, 0.05, &mut rng).unwrap();
        comps.tau_post[0] = Complex64::new(0.2, 0.0);
        assert!(apply_combined(&phi, &x, &comps).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(NoiseSpec::PostSignDense { tau0: -0.1 }
            .validate(10)
            .is_err());
        assert!(NoiseSpec::PostSignDense { tau0: 1.5 }.validate(10).is_err());
        assert!(NoiseSpec::Combined {
            tau0: 0.1,
            zeta0: 1.2
        }
        .validate(10)
        .is_err());
        assert!(NoiseSpec::PreSignDense { tau0: 0.84 }.validate(10).is_ok());
    }
}
