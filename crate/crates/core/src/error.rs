use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix has non-real entries")]
    NotReal,
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not skew-symmetric (deviation {0:e})")]
    NotSkew(f64),
    #[error("quaternion matrix is not self-dual (deviation {0:e})")]
    NotSelfDual(f64),
    #[error("odd dimension {0}")]
    OddDimension(usize),
    #[error("QR iteration failed to converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("insufficient samples: have {have}, need {need}")]
    InsufficientSamples { have: usize, need: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("support of test function exceeds the admissible region: {0}")]
    Support(String),
}

pub type Result<T> = std::result::Result<T, Error>;
