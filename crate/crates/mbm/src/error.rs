//! Error type shared across the crate.

/// Errors produced by problem construction, solver configuration and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum MbmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown problem \"{name}\"; available: {available}")]
    UnknownProblem { name: String, available: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("evaluation outside the strict interior: {0}")]
    Domain(String),

    #[error("tied maximum components {first} and {second} (within {tolerance:e}); gradient undefined")]
    TiedMax {
        first: usize,
        second: usize,
        tolerance: f64,
    },

    #[error("operation not supported: {0}")]
    Capability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, MbmError>;
