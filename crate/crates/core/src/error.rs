use thiserror::Error;

/// Errors produced by lattice, channel, and estimator operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sphere enumeration found no lattice point within radius {radius:.6e}")]
    EnumerationExhausted { radius: f64 },

    #[error("lattice dimension {dim} exceeds the enumeration limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("lattices are not nested: {0}")]
    NotNested(String),

    #[error("message index {index} out of range for codebook of size {size}")]
    MessageOutOfRange { index: u64, size: u64 },

    #[error("matrix is singular or not positive definite")]
    Singular,

    #[error("estimator failure: {0}")]
    Estimator(String),

    #[error("inapplicable configuration: {0}")]
    Inapplicable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
