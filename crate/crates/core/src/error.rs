use thiserror::Error;

/// Errors surfaced by the model and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The requested quantity is infinite for the given parameters.
    #[error("divergent quantity: {0}")]
    Divergence(String),

    /// Parameters are individually valid but outside the region where the
    /// analytic evaluator is defined.
    #[error("outside analytic domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
