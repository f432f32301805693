use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// A quadrature or series evaluation failed to reach its target accuracy.
    #[error("numeric failure in {context}: {reason}")]
    Numeric { context: &'static str, reason: String },

    /// The iterative eigensolver hit its iteration cap.
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    /// Bad run configuration (CLI flags or config file).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    pub fn numeric(context: &'static str, reason: impl Into<String>) -> Self {
        Error::Numeric {
            context,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
