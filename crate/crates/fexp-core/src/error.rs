use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scheme configuration violates its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// A requested combination is valid but not implemented.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A numerical routine failed to converge or lost accuracy.
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
