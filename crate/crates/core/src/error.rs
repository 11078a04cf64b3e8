use thiserror::Error;

/// Errors produced by the analytic, simulation and reporting layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A special function was evaluated outside its domain.
    #[error("{function}({value}) is outside the domain {expected}")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    NonConvergence { estimate: f64, tolerance: f64 },

    /// Normalized error requested against an exact value of zero.
    #[error("normalized error is undefined for an exact value of {0}")]
    UndefinedNormalization(f64),

    /// A histogram and an analytic curve do not share a support.
    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Config(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// Whether the error comes from user-supplied settings rather than from
    /// a computation.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Parse(_) | Error::Config(_))
    }
}
