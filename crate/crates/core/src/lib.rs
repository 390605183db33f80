//! Phase-only compressed sensing (PO-CS) toolkit.
//!
//! Everything here is pure computation over `alloc` containers: complex
//! Gaussian sensing, phase observations and their noise channels, the
//! linearized real sensing matrices, an ADMM solver for (weighted) basis
//! pursuit with an exact LP oracle beside it, the end-to-end estimators and
//! empirical certificates (RIP distortion, small-measurement counts).
//!
//! IO, experiment sweeps and the command line live in the `pocs-lab` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod linearization;
pub mod measurement;
pub mod recovery;
pub mod rng;
pub mod signal;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;
