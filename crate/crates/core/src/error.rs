use thiserror::Error;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyDimensions { rows: usize, cols: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("signal is identically zero")]
    ZeroSignal,
    #[error("vanishing normalization Re(z^* Phi x) = {0:e}")]
    VanishingDenominator(f64),
    #[error("corruption has {found} nonzero entries, at most {allowed} allowed")]
    CorruptionTooDense { found: usize, allowed: usize },
    #[error("corruption entry {index} has modulus {modulus} > {bound}")]
    CorruptionTooLarge {
        index: usize,
        modulus: f64,
        bound: f64,
    },
    #[error(
        "exhaustive search needs {supports} supports, cap is {cap}; use the monte-carlo estimate"
    )]
    CombinatorialCap { supports: u128, cap: u128 },
    #[error("oracle dimension {found} exceeds cap {cap}")]
    OracleCap { found: usize, cap: usize },
    #[error("infeasible: {0}")]
    Infeasible(&'static str),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
