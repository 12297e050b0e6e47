use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum PkError {
    /// An argument fell outside the accepted range of an operation.
    #[error("out of bounds: {0}")]
    Bounds(String),

    /// Structurally invalid input (empty mass vector, bad partition, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation could not reach its accuracy budget. Raised instead of
    /// returning a silently wrong value.
    #[error("numerical accuracy: {0}")]
    NumericalAccuracy(String),

    /// An internal cross-check failed (e.g. prediction probabilities not
    /// summing to one, or a Levy model failing its construction validation).
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Invalid configuration of a sampler or a check.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, PkError>;
