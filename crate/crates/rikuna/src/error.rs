use thiserror::Error;

/// Errors produced by the library.
///
/// The variants mirror the failure classes used throughout: bad parameters
/// (caller bugs), unmet mathematical preconditions, inputs outside an
/// operation's domain, and internal cross-check failures (two independent
/// routes to the same value disagreed, which indicates a bug here, not in
/// the caller).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("precondition not satisfied: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("internal cross-check failed: {0}")]
    InternalCheck(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
