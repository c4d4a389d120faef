use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its allowed range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data violates a structural invariant (lengths, dimensions, ranges).
    #[error("validation failed: {0}")]
    Validation(String),

    /// Two operands have incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The state does not have the image-state structure required by the operation.
    #[error("malformed state: {0}")]
    MalformedState(String),

    /// Samples whose circular mean has (almost) zero resultant length.
    #[error("degenerate distribution: resultant length {0:.3e}")]
    DegenerateDistribution(f64),

    /// The requested problem exceeds the desk-scale limits.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("malformed PGM data: {0}")]
    Pgm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
