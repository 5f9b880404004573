use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no proper subgroup: {0}")]
    NoProperSubgroup(String),

    #[error("greedy step stalled: W = {w:e}, delta = {delta:e}")]
    Stall { w: f64, delta: f64 },

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
