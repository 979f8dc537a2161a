use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A prefix length outside the curve's defined domain `[1, horizon]`.
    #[error("prefix length {t} is outside the curve domain [1, {horizon}]")]
    LengthOutOfRange { t: u32, horizon: u32 },

    /// A curve description that violates the step-curve invariants.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// No prefix length has cost at or below the requested budget.
    #[error("no prefix length has cost <= {budget}; the cheapest solution costs {min_cost}")]
    NoFeasibleLength { budget: f64, min_cost: f64 },

    /// A scalar or structural argument outside its documented domain.
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// A threshold strategy ran out of thresholds before covering the input.
    #[error("threshold strategy has no threshold beyond t = {t}; the run cannot stay feasible")]
    StrategyExhausted { t: u32 },

    /// An operation that requires at least one element got none.
    #[error("empty {what}")]
    EmptyInput { what: &'static str },

    /// An enumeration whose size exceeds the supported limit.
    #[error("{what} would enumerate {size} items; the limit is {limit}")]
    CapacityExceeded {
        what: &'static str,
        size: u64,
        limit: u64,
    },

    /// A metric that must be finite came out NaN or infinite.
    #[error("non-finite value for metric `{metric}`")]
    NonFiniteMetric { metric: String },

    /// A malformed or self-contradictory experiment configuration.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
