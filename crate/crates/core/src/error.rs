use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The requested Hilbert space is too large for dense representation.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A physical or numerical precondition on the run configuration is violated.
    #[error("configuration error: {0}")]
    Config(String),
    /// The integrator lost unitarity or otherwise produced an unusable state.
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Integration(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
