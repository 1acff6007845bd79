use thiserror::Error;

/// Errors raised by the library.
///
/// `Validation` covers malformed or out-of-domain input; `Check` is reserved
/// for internal consistency failures (an enumerated quantity disagreeing with
/// the closed form it should match).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("elements or ideals belong to different fields")]
    FieldMismatch,
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("consistency check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
