use thiserror::Error;

/// Errors raised by the distribution, analytic and fitting layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("models are not nested: {0}")]
    NotNested(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("optimizer did not converge: {message}")]
    NonConvergence { message: String, trace: Vec<f64> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
