use thiserror::Error;

use crate::conic::SolveStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate register label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown register label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("register order is not a permutation: {0}")]
    NotPermutation(String),
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("solver returned {status:?}: {detail}")]
    Solver { status: SolveStatus, detail: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
