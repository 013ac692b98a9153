//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate an operation's domain: dimension mismatch, empty
    /// sample, parameter outside its admissible range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Parameters break a hypothesis the convergence guarantees need,
    /// e.g. a step size at or above the stability threshold.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// The operation is not available for this configuration, e.g. a
    /// mean-field evaluation without a closed form.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Configuration file is malformed or inconsistent.
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code. Config and input problems exit 2, violated
    /// model hypotheses exit 3. Verification failures are not errors;
    /// the verify command maps a failing verdict to exit 4 itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Hypothesis(_) => 3,
            _ => 2,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn hypothesis(msg: impl Into<String>) -> Error {
    Error::Hypothesis(msg.into())
}

pub(crate) fn unsupported(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}
