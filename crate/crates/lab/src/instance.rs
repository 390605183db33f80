//! Single-instance JSON files for the `recover` subcommand.
//!
//! ```json
//! { "m": 3, "n": 2,
//!   "matrix": { "re": [...m*n, row-major], "im": [...] },
//!   "phases": { "re": [...m], "im": [...m] },
//!   "signal": [...n] }
//! ```
//! `signal` is optional; with it the output reports the recovery error.

use std::path::Path;

use num_complex::Complex64;
use pocs_core::measurement::{apply_channel, NoiseSpec, SensingMatrix};
use pocs_core::rng::{stream, streams};
use pocs_core::signal::SignalVector;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexArray {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexArray {
    pub fn from_complex(values: &[Complex64]) -> Self {
        Self {
            re: values.iter().map(|c| c.re).collect(),
            im: values.iter().map(|c| c.im).collect(),
        }
    }

    pub fn to_complex(&self) -> Option<Vec<Complex64>> {
        (self.re.len() == self.im.len()).then(|| {
            self.re
                .iter()
                .zip(&self.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    pub matrix: ComplexArray,
    pub phases: ComplexArray,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<Vec<f64>>,
}

/// Parsed instance ready for recovery.
#[derive(Debug, Clone)]
pub struct Instance {
    pub phi: SensingMatrix,
    pub phases: Vec<Complex64>,
    pub signal: Option<Vec<f64>>,
}

impl InstanceFile {
    /// Draws a random instance: `s`-sparse unit signal observed through `spec`.
    pub fn generate(
        m: usize,
        n: usize,
        s: usize,
        spec: Option<&NoiseSpec>,
        seed: u64,
    ) -> pocs_core::Result<Self> {
        let phi = SensingMatrix::draw(m, n, seed)?;
        let x = SignalVector::random_sparse(n, s, &mut stream(seed, streams::SIGNAL))?;
        let z = apply_channel(&phi, &x.values, spec, &mut stream(seed, streams::CHANNEL))?;
        Ok(Self {
            m,
            n,
            matrix: ComplexArray::from_complex(phi.entries()),
            phases: ComplexArray::from_complex(&z.values),
            signal: Some(x.values),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| LabError::data(path, e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| LabError::data(path, e))?;
        std::fs::write(path, text).map_err(|e| LabError::io(path, e))
    }

    pub fn into_instance(self, path: &Path) -> Result<Instance> {
        let bad = |msg: &str| LabError::data(path, msg);
        let entries = self
            .matrix
            .to_complex()
            .ok_or_else(|| bad("matrix re/im lengths differ"))?;
        let phi = SensingMatrix::from_entries(self.m, self.n, entries)
            .map_err(|e| LabError::data(path, e))?;
        let phases = self
            .phases
            .to_complex()
            .ok_or_else(|| bad("phase re/im lengths differ"))?;
        if phases.len() != self.m {
            return Err(bad("phase vector length differs from m"));
        }
        if let Some(x) = &self.signal {
            if x.len() != self.n {
                return Err(bad("signal length differs from n"));
            }
        }
        Ok(Instance {
            phi,
            phases,
            signal: self.signal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let inst = InstanceFile::generate(12, 8, 2, None, 4).unwrap();
        inst.save(&path).unwrap();
        let back = InstanceFile::load(&path).unwrap();
        assert_eq!(back, inst);
        let parsed = back.into_instance(&path).unwrap();
        assert_eq!(parsed.phi.rows(), 12);
        assert_eq!(parsed.phases.len(), 12);
    }

    #[test]
    fn inconsistent_lengths_rejected() {
        let mut inst = InstanceFile::generate(5, 4, 1, None, 1).unwrap();
        inst.phases.re.pop();
        let err = inst.into_instance(Path::new("x.json")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
