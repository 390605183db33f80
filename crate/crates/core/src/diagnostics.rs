//! Empirical certificates: RIP distortion over sparse cones, counts of
//! near-zero measurements, ℓ1 concentration of `Φx`, and an audit of the
//! phase perturbation bound.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{norm2, symmetric_eigenvalues, LinearMap, Matrix};
use crate::linearization::KAPPA;
use crate::measurement::{phase, SensingMatrix};
use crate::rng::{stream, streams};

/// Largest number of supports [`rip_exhaustive`] will enumerate.
pub const EXHAUSTIVE_CAP: u128 = 200_000;

/// Sparse cone over which distortion is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RipCone {
    /// `Σ_t`: all `t`-sparse vectors.
    Sparse { t: usize },
    /// `Σ_t × Σ_k` over the column split `[0, split) ∪ [split, cols)`.
    Product { split: usize, t: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RipMethod {
    Exhaustive,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipEstimate {
    pub cone: RipCone,
    /// Exact distortion for exhaustive runs, a lower bound otherwise.
    pub delta: f64,
    pub method: RipMethod,
    pub certified: bool,
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn distortion_on(gram: &Matrix, support: &[usize], sub: &mut Matrix) -> f64 {
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            sub.set(a, b, gram.get(i, j));
        }
    }
    let eig = symmetric_eigenvalues(sub);
    let lo = eig.first().copied().unwrap_or(1.0);
    let hi = eig.last().copied().unwrap_or(1.0);
    (hi - 1.0).max(1.0 - lo)
}

fn validate_cone(cone: &RipCone, cols: usize) -> Result<()> {
    let ok = match *cone {
        RipCone::Sparse { t } => t >= 1 && t <= cols,
        RipCone::Product { split, t, k } => {
            split <= cols && t <= split && k <= cols - split && t + k >= 1
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "cone",
            reason: "sparsity levels must fit the column blocks",
        })
    }
}

/// Exact distortion `max_S max(λ_max − 1, 1 − λ_min)` of `A_Sᵀ A_S` over
/// every support of the cone.
pub fn rip_exhaustive(a: &Matrix, cone: RipCone) -> Result<RipEstimate> {
    let cols = a.ncols();
    validate_cone(&cone, cols)?;
    let supports = match cone {
        RipCone::Sparse { t } => binomial(cols, t),
        RipCone::Product { split, t, k } => {
            binomial(split, t).saturating_mul(binomial(cols - split, k))
        }
    };
    if supports > EXHAUSTIVE_CAP {
        return Err(Error::CombinatorialCap {
            supports,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let gram = a.column_gram();
    let mut delta: f64 = 0.0;
    match cone {
        RipCone::Sparse { t } => {
            let mut sub = Matrix::zeros(t, t);
            let mut idx: Vec<usize> = (0..t).collect();
            loop {
                delta = delta.max(distortion_on(&gram, &idx, &mut sub));
                if !next_combination(&mut idx, cols) {
                    break;
                }
            }
        }
        RipCone::Product { split, t, k } => {
            let tail = cols - split;
            let mut sub = Matrix::zeros(t + k, t + k);
            let mut support = vec![0; t + k];
            let mut head: Vec<usize> = (0..t).collect();
            loop {
                let mut rest: Vec<usize> = (0..k).collect();
                loop {
                    support[..t].copy_from_slice(&head);
                    for (dst, r) in support[t..].iter_mut().zip(&rest) {
                        *dst = split + r;
                    }
                    delta = delta.max(distortion_on(&gram, &support, &mut sub));
                    if !next_combination(&mut rest, tail) {
                        break;
                    }
                }
                if !next_combination(&mut head, split) {
                    break;
                }
            }
        }
    }
    Ok(RipEstimate {
        cone,
        delta,
        method: RipMethod::Exhaustive,
        certified: true,
    })
}

/// Lower bound on the distortion from random unit vectors of the cone
/// (uniform supports, Gaussian coefficients).
pub fn rip_monte_carlo<A: LinearMap + ?Sized>(
    a: &A,
    cone: RipCone,
    samples: usize,
    seed: u64,
) -> Result<RipEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "must be at least 1",
        });
    }
    let cols = a.cols();
    validate_cone(&cone, cols)?;
    let mut rng = stream(seed, streams::SAMPLER);
    let mut u = vec![0.0; cols];
    let mut image = vec![0.0; a.rows()];
    let mut delta: f64 = 0.0;
    for _ in 0..samples {
        u.iter_mut().for_each(|v| *v = 0.0);
        match cone {
            RipCone::Sparse { t } => {
                for j in index::sample(&mut rng, cols, t) {
                    u[j] = rng.sample(StandardNormal);
                }
            }
            RipCone::Product { split, t, k } => {
                for j in index::sample(&mut rng, split, t) {
                    u[j] = rng.sample(StandardNormal);
                }
                for j in index::sample(&mut rng, cols - split, k) {
                    u[split + j] = rng.sample(StandardNormal);
                }
            }
        }
        let nrm = norm2(&u);
        if nrm == 0.0 {
            continue;
        }
        u.iter_mut().for_each(|v| *v /= nrm);
        a.apply(&u, &mut image);
        let sq: f64 = image.iter().map(|v| v * v).sum();
        delta = delta.max((sq - 1.0).abs());
    }
    Ok(RipEstimate {
        cone,
        delta,
        method: RipMethod::MonteCarlo { samples },
        certified: false,
    })
}

/// `|J_{x,η}| = #{i : |Φ_i^* x| ≤ η}`.
pub fn count_small_measurements(phi: &SensingMatrix, x: &[f64], eta: f64) -> Result<usize> {
    if !(eta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: "must be nonnegative",
        });
    }
    Ok(phi.apply(x)?.iter().filter(|c| c.norm() <= eta).count())
}

/// `|‖Φx‖_1/(κ m) − 1|` for `x` rescaled to unit norm.
pub fn l1_concentration(phi: &SensingMatrix, x: &[f64]) -> Result<f64> {
    ensure_len("signal", phi.cols(), x.len())?;
    let nrm = norm2(x);
    if !(nrm > 0.0) {
        return Err(Error::ZeroSignal);
    }
    let l1 = phi.l1_norm_of_image(x)? / nrm;
    Ok((l1 / (KAPPA * phi.rows() as f64) - 1.0).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationAudit {
    /// `max_i (|z̆_i − z_i| − bound_i)`, clipped at 0.
    pub max_violation: f64,
    /// Index attaining the largest `|z̆_i − z_i| − bound_i`.
    pub worst_index: Option<usize>,
    pub checked: usize,
}

/// `min{2|δ|/max(|c + δ|, |c|), 2}` with `t/0 = ∞`.
pub fn phase_perturbation_bound(c: Complex64, delta: Complex64) -> f64 {
    let denom = (c + delta).norm().max(c.norm());
    if denom == 0.0 {
        return 2.0;
    }
    (2.0 * delta.norm() / denom).min(2.0)
}

/// Checks `|z̆_i − z_i| ≤ min{2|δ_i|/max(|Φ_i^* x + δ_i|, |Φ_i^* x|), 2}` for
/// observations produced by a known pre-sign perturbation `δ`.
pub fn perturbation_audit(
    perturbed: &[Complex64],
    clean: &[Complex64],
    phi: &SensingMatrix,
    x: &[f64],
    delta: &[Complex64],
) -> Result<PerturbationAudit> {
    let m = phi.rows();
    ensure_len("perturbed phases", m, perturbed.len())?;
    ensure_len("clean phases", m, clean.len())?;
    ensure_len("perturbation", m, delta.len())?;
    let image = phi.apply(x)?;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_index = None;
    for i in 0..m {
        let gap = (perturbed[i] - clean[i]).norm() - phase_perturbation_bound(image[i], delta[i]);
        if gap > worst {
            worst = gap;
            worst_index = Some(i);
        }
    }
    Ok(PerturbationAudit {
        max_violation: worst.max(0.0),
        worst_index,
        checked: m,
    })
}

/// Phases of `Φx + δ`, a convenience for building audit inputs.
pub fn perturbed_phases(
    phi: &SensingMatrix,
    x: &[f64],
    delta: &[Complex64],
) -> Result<Vec<Complex64>> {
    ensure_len("perturbation", phi.rows(), delta.len())?;
    Ok(phi
        .apply(x)?
        .iter()
        .zip(delta)
        .map(|(c, d)| phase(c + d))
        .collect())
}
