use thiserror::Error;

/// Errors raised by the curve-space machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample count {got} below minimum {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("sample count mismatch: {left} vs {right}")]
    SampleCountMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("immersion violated at sample {index}")]
    Immersion { index: usize },

    #[error("degenerate curve: {0}")]
    Degenerate(&'static str),

    #[error("invalid metric configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel matrix not positive definite (closest pair {i}, {j})")]
    NotPositiveDefinite { i: usize, j: usize },

    #[error("linear solve failed: relative residual {residual:e}")]
    SolveFailed { residual: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(&'static str),

    #[error("trajectory blow-up at step {step}")]
    BlowUp { step: usize },

    #[error("experiment error: {0}")]
    Experiment(String),
}

pub type Result<T> = std::result::Result<T, Error>;
