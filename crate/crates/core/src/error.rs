use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to be
/// printed directly to a user.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("{0}")]
    NotDivisible(String),

    #[error("comparison undecided at {prec} bits: {what}")]
    Indeterminate { what: String, prec: u32 },

    #[error("scan cap {cap} reached while {what}")]
    ScanCap { what: String, cap: u64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
