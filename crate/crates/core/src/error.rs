use thiserror::Error;

/// Errors raised by scenario construction, the solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown user id {0}")]
    UnknownUser(usize),

    #[error("users {0} and {1} must be distinct downlink users")]
    InvalidSicPair(usize, usize),

    #[error("multiplier bisection did not converge after {steps} steps (relative budget residual {residual:e})")]
    BisectionFailed { steps: usize, residual: f64 },

    #[error("grid oracle limited to {max} decision dimensions, instance has {dims}")]
    OracleTooLarge { dims: usize, max: usize },

    #[error("grid oracle needs 1..={max} grid points per dimension, got {got}")]
    OracleGrid { got: usize, max: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
