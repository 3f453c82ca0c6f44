use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("quadrature grid too small: need {needed} points, have {available}")]
    GridTooSmall { needed: usize, available: usize },

    #[error("step rejected at t = {time}: relative L2 drift {drift:.3e} exceeds {limit:.1e}")]
    StepRejected { time: f64, drift: f64, limit: f64 },

    #[error("series did not converge after {terms} terms (last term norm {last:.3e})")]
    NotConverged { terms: usize, last: f64 },

    #[error("exact evaluation exceeds budget: {what}")]
    BudgetExceeded { what: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { key: key.to_string(), reason: reason.into() }
    }

    /// Validation failures are user-correctable; everything else is a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Parse(_))
    }
}
