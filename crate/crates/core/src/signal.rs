//! Real test signals: unit-norm sparse vectors and compressible power laws.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::norm2;

/// A real signal, optionally tagged with the sparsity level it was drawn at.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    pub values: Vec<f64>,
    pub sparsity: Option<usize>,
}

impl SignalVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            sparsity: None,
        }
    }

    /// Tags `values` as `s`-sparse, rejecting vectors with more nonzeros.
    pub fn sparse(values: Vec<f64>, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: "sparsity must be positive",
            });
        }
        if values.iter().filter(|v| **v != 0.0).count() > s {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "more nonzeros than the sparsity tag allows",
            });
        }
        Ok(Self {
            values,
            sparsity: Some(s),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.values)
    }

    pub fn support(&self) -> Vec<usize> {
        support(&self.values)
    }

    /// Copy scaled to unit Euclidean norm.
    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return Err(Error::ZeroSignal);
        }
        Ok(Self {
            values: self.values.iter().map(|v| v / nrm).collect(),
            sparsity: self.sparsity,
        })
    }

    /// Uniform draw from the unit-norm `s`-sparse vectors: a uniform support
    /// of size `s`, i.i.d. standard normal coefficients, then normalization.
    pub fn random_sparse<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<Self> {
        if s == 0 || s > n {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: "sparsity must satisfy 1 <= s <= n",
            });
        }
        let mut values = vec![0.0; n];
        let mut support = index::sample(rng, n, s).into_vec();
        support.sort_unstable();
        loop {
            for &j in &support {
                values[j] = rng.sample(StandardNormal);
            }
            if norm2(&values) > 0.0 {
                break;
            }
        }
        Self::sparse(values, s)?.normalized()
    }

    /// Compressible signal `x_i ∝ i^{-q}` (i = 1..n), randomly signed and
    /// permuted, normalized to the unit sphere.
    pub fn power_law<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimensions { rows: n, cols: 1 });
        }
        if !(q > 0.0) {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: "power-law decay must be positive",
            });
        }
        let perm = index::sample(rng, n, n).into_vec();
        let mut values = vec![0.0; n];
        for (rank, &pos) in perm.iter().enumerate() {
            let magnitude = libm::pow((rank + 1) as f64, -q);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            values[pos] = sign * magnitude;
        }
        Self::new(values).normalized()
    }
}

pub fn support(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}
