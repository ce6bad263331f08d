use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation requires a convex polygon")]
    NotAPolygon,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Monte Carlo budget {budget} below the minimum of {min}")]
    BudgetTooSmall { budget: usize, min: usize },
    #[error("radius {r} outside the valid range (support diameter {diameter})")]
    RadiusOutOfRange { r: f64, diameter: f64 },
    #[error("replication {replication} failed: {source}")]
    Replication {
        replication: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("reference table mismatch: {0}")]
    ReferenceMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
