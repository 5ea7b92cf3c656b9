use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported size: {what} is {size}, limit is {limit}{}", hint.map(|h| format!(" ({h})")).unwrap_or_default())]
    UnsupportedSize {
        what: &'static str,
        size: usize,
        limit: usize,
        hint: Option<&'static str>,
    },

    #[error("{letters} is not a stabilizer letter pattern: {reason}")]
    NotStabilizerShaped { letters: String, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A mathematical invariant was violated. Seeing this means a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn too_big(what: &'static str, size: usize, limit: usize) -> Self {
        Error::UnsupportedSize {
            what,
            size,
            limit,
            hint: None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
