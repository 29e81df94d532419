use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Input { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },
    #[error(transparent)]
    Core(#[from] teamfuse_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn format(what: &'static str, message: impl ToString) -> Self {
        Error::Format { what, message: message.to_string() }
    }

    /// Process exit status: 2 for bad input of any kind, 4 for failed writes.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Output { .. } => 4,
            _ => 2,
        }
    }
}
