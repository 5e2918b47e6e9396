//! Crate-wide error type.

use alloc::string::String;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Text input did not match the expected schema. Line numbers are 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A binary format check failed; `check` names the failing check.
    #[error("format error: {check} check failed: {detail}")]
    Format {
        /// Name of the failing check (`magic`, `version`, `truncation`,
        /// `shape`, `checksum`).
        check: &'static str,
        /// Human-readable detail, possibly empty.
        detail: String,
    },

    /// A data channel or sample had zero variance where spread is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Numeric integration or evaluation produced a non-finite value.
    #[error("numeric failure at t = {time} s: {message}")]
    Numeric { time: f64, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = core::result::Result<T, Error>;
