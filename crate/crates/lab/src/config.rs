//! Experiment configuration, loaded from JSON and overridden by CLI flags.

use std::path::{Path, PathBuf};

use pocs_core::measurement::{corruption_count, Corruption, NoiseSpec};
use pocs_core::recovery::{CombinedConstants, EpsilonMode};
use pocs_core::solver::SolverOptions;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const POST_SIGN_GRID: [f64; 10] = [0.04, 0.08, 0.12, 0.16, 0.20, 0.24, 0.28, 0.32, 0.36, 0.40];
pub const PRE_SIGN_GRID: [f64; 11] = [
    0.04, 0.12, 0.20, 0.28, 0.36, 0.44, 0.52, 0.60, 0.68, 0.76, 0.84,
];
pub const CORRUPTION_GRID: [f64; 8] = [1.0, 2.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    Clean,
    PostSign,
    PreSign,
    Corruption,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonChoice {
    Theorem,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Standard,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Test signal family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalModel {
    /// Uniform support of size `s`, Gaussian coefficients, unit norm.
    Sparse,
    /// `|x_i| ∝ i^{-q}` with random signs and order, unit norm.
    PowerLaw { q: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rho: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    pub over_relaxation: f64,
    pub adaptive_rho: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            rho: o.rho,
            tol_primal: o.tol_primal,
            tol_dual: o.tol_dual,
            max_iter: o.max_iter,
            over_relaxation: o.relaxation,
            adaptive_rho: o.adaptive_rho,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            rho: self.rho,
            tol_primal: self.tol_primal,
            tol_dual: self.tol_dual,
            max_iter: self.max_iter,
            relaxation: self.over_relaxation,
            adaptive_rho: self.adaptive_rho,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub channel: Channel,
    /// Swept for the dense and combined channels; channel default if absent.
    pub tau0_grid: Option<Vec<f64>>,
    /// Corruption counts `ζ0·m`; swept for the corruption channel, a single
    /// value for the combined one.
    pub zeta0m_grid: Option<Vec<f64>>,
    pub epsilon_mode: EpsilonChoice,
    /// Combined-channel radius constants; the defaults are used (and echoed
    /// in the output metadata) when absent.
    pub combined_constants: Option<ConstantsConfig>,
    pub estimator: Estimator,
    pub signal: SignalModel,
    pub solver: SolverConfig,
    /// Reuse one sensing matrix for every trial instead of redrawing.
    pub fixed_matrix: bool,
    /// Record wall-clock times; off makes outputs byte-reproducible.
    pub timing: bool,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 500,
            m: 300,
            s: 5,
            trials: 50,
            base_seed: 0,
            channel: Channel::PostSign,
            tau0_grid: None,
            zeta0m_grid: None,
            epsilon_mode: EpsilonChoice::Oracle,
            combined_constants: None,
            estimator: Estimator::Standard,
            signal: SignalModel::Sparse,
            solver: SolverConfig::default(),
            fixed_matrix: false,
            timing: true,
            output_path: None,
            format: OutputFormat::Csv,
        }
    }
}

fn config_err(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            LabError::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn tau0_values(&self) -> Vec<f64> {
        match (&self.tau0_grid, self.channel) {
            (Some(g), _) => g.clone(),
            (None, Channel::PreSign) => PRE_SIGN_GRID.to_vec(),
            (None, Channel::Combined) => vec![0.05],
            (None, _) => POST_SIGN_GRID.to_vec(),
        }
    }

    pub fn zeta0m_values(&self) -> Vec<f64> {
        match (&self.zeta0m_grid, self.channel) {
            (Some(g), _) => g.clone(),
            (None, Channel::Combined) => vec![3.0],
            (None, _) => CORRUPTION_GRID.to_vec(),
        }
    }

    /// Values of the swept parameter, in output order.
    pub fn grid(&self) -> Vec<f64> {
        match self.channel {
            Channel::Clean => vec![0.0],
            Channel::PostSign | Channel::PreSign | Channel::Combined => self.tau0_values(),
            Channel::Corruption => self.zeta0m_values(),
        }
    }

    pub fn constants(&self) -> CombinedConstants {
        self.combined_constants
            .map(|c| CombinedConstants {
                c1: c.c1,
                c2: c.c2,
                c3: c.c3,
            })
            .unwrap_or_default()
    }

    pub fn epsilon_mode(&self) -> EpsilonMode {
        match self.epsilon_mode {
            EpsilonChoice::Theorem => EpsilonMode::Theorem(self.constants()),
            EpsilonChoice::Oracle => EpsilonMode::Oracle,
        }
    }

    /// Noise model at one grid value.
    pub fn noise_at(&self, grid_value: f64) -> Option<NoiseSpec> {
        let m = self.m as f64;
        match self.channel {
            Channel::Clean => None,
            Channel::PostSign => Some(NoiseSpec::PostSignDense { tau0: grid_value }),
            Channel::PreSign => Some(NoiseSpec::PreSignDense { tau0: grid_value }),
            Channel::Corruption => Some(NoiseSpec::SparseCorruption {
                zeta0: grid_value / m,
                mechanism: Corruption::LargestRotateI,
            }),
            Channel::Combined => Some(NoiseSpec::Combined {
                tau0: grid_value,
                zeta0: self.zeta0m_values()[0] / m,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.s == 0 || self.trials == 0 {
            return Err(config_err("n, m, s and trials must be positive"));
        }
        if self.s > self.n {
            return Err(config_err("s must not exceed n"));
        }
        let grid = self.grid();
        if grid.is_empty() {
            return Err(config_err("grid is empty"));
        }
        if grid.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(config_err("grid values must be finite and nonnegative"));
        }
        for (i, a) in grid.iter().enumerate() {
            if grid[..i].iter().any(|b| b.to_bits() == a.to_bits()) {
                return Err(config_err(format!("grid value {a} is repeated")));
            }
        }
        if self.channel == Channel::Combined && self.zeta0m_values().len() != 1 {
            return Err(config_err(
                "combined channel sweeps tau0; zeta0m_grid must hold one value",
            ));
        }
        if matches!(self.channel, Channel::Corruption | Channel::Combined) {
            for v in self.zeta0m_values() {
                if v > self.m as f64 {
                    return Err(config_err("zeta0m cannot exceed m"));
                }
                if v.fract() != 0.0 || corruption_count(v / self.m as f64, self.m) as f64 != v {
                    return Err(config_err("zeta0m values must be whole counts"));
                }
            }
        }
        if self.estimator == Estimator::Extended
            && matches!(self.channel, Channel::PostSign | Channel::PreSign)
        {
            return Err(config_err(
                "extended estimator needs a corruption level (corruption, combined or clean channel)",
            ));
        }
        if let SignalModel::PowerLaw { q } = self.signal {
            if !(q > 0.0 && q.is_finite()) {
                return Err(config_err("power-law exponent must be positive"));
            }
        }
        for v in grid {
            if let Some(spec) = self.noise_at(v) {
                spec.validate(self.m)
                    .map_err(|e| config_err(format!("grid value {v}: {e}")))?;
            }
        }
        self.solver
            .options()
            .validate()
            .map_err(|e| config_err(format!("solver: {e}")))?;
        Ok(())
    }
}
