use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
    #[error("solver fault: {0}")]
    Solver(#[from] pocs_core::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn data(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        LabError::Data {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Core error caused by user-supplied parameters rather than the
    /// numerics; such errors exit as config errors.
    pub fn from_params(e: pocs_core::Error) -> Self {
        use pocs_core::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::EmptyDimensions { .. }
            | E::CombinatorialCap { .. }
            | E::OracleCap { .. } => LabError::Config(e.to_string()),
            other => LabError::Solver(other),
        }
    }

    /// Process exit status: 1 config, 2 I/O, 3 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 1,
            LabError::Io { .. } | LabError::Data { .. } => 2,
            LabError::Solver(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
