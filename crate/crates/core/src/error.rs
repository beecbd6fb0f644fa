use thiserror::Error;

/// Errors raised by the library's construction and evaluation paths.
///
/// Statistical verdicts (pass / fail / inconclusive) are *not* errors; they
/// are data carried by reports. Errors are reserved for inputs that make a
/// computation meaningless: non-finite vectors, values outside a function's
/// domain, or configurations that cannot be instantiated.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
