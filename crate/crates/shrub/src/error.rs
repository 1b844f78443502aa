use thiserror::Error;

/// Errors raised by parsers, solvers and oracles.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Domain(String),
    #[error("capability exceeded: {0}")]
    Capability(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub fn is_capability(&self) -> bool {
        matches!(self, Error::Capability(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
