use std::io;
use std::path::PathBuf;

use crate::config::ConfigError;
use crate::ingest::IngestError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: IngestError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Core(#[from] levdrag_core::Error),
    #[error("unknown format `{0}` (expected plain, delimited or structured)")]
    UnknownFormat(String),
    #[error("cannot serialize report: {0}")]
    Serialize(String),
}

impl Error {
    /// 1 for usage and configuration problems, 2 for data and IO problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) | Error::UnknownFormat(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
