//! Experiment runner, file formats and command line on top of `pocs-core`.

pub mod checks;
pub mod config;
pub mod emit;
pub mod error;
pub mod instance;
pub mod runner;
pub mod selftest;
pub mod summary;

pub use error::{LabError, Result};
