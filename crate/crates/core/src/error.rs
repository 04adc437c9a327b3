use std::path::PathBuf;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("eigensolver did not converge within {matvecs} matrix-vector products (worst residual {residual:.3e}, tolerance {tolerance:.1e})")]
    EigenNonConvergence {
        matvecs: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("dataset error in {file}: {message}")]
    Dataset { file: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn dataset(file: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Dataset {
            file: file.into(),
            message: msg.into(),
        }
    }
}
