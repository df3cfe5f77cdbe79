use thiserror::Error;

/// Library-wide error type.
///
/// The CLI maps these to exit codes: anything that amounts to bad input or a
/// violated precondition exits 2, while a failed numerical assertion (a check
/// the math says must hold) exits 3.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `value_at_quantile(0)` on a distribution with unbounded support.
    #[error("unbounded value at quantile 0")]
    UnboundedValue,

    /// Density requested where none exists (discrete family or atom).
    #[error("no density at v={0}")]
    NoDensity(f64),

    #[error("empty sample batch")]
    EmptyBatch,

    /// A usage precondition was violated (wrong m for a strategy, quantile
    /// outside the documented range, ...).
    #[error("usage: {0}")]
    Usage(String),

    /// Kullback-Leibler divergence is infinite (support mismatch).
    #[error("infinite divergence: {0}")]
    InfiniteDivergence(String),

    /// A declared density-ratio band does not hold on the verification grid.
    #[error("density-ratio hypothesis fails at v={0}")]
    RatioHypothesis(f64),

    /// Monte-Carlo confidence interval too wide for the requested tolerance.
    #[error("insufficient trials: {0}")]
    InsufficientTrials(String),

    /// A quantity the theory guarantees failed its numerical check.
    #[error("numerical assertion failed: {0}")]
    NumericalAssertion(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ModelError {
    /// Process exit status for the CLI: 2 = validation/usage, 3 = numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            ModelError::NumericalAssertion(_) | ModelError::RatioHypothesis(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
