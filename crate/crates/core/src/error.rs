use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArfimaError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("model is not stationary: {0}")]
    NotStationary(String),
    #[error("model is not invertible: {0}")]
    NotInvertible(String),
    #[error("AR polynomial roots must have multiplicity one (roots {0} and {1} coincide)")]
    RepeatedArRoot(usize, usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("series did not converge after {0} terms")]
    SeriesDiverged(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
}

pub type Result<T> = std::result::Result<T, ArfimaError>;
