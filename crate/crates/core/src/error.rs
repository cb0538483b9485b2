use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("io error: {0}")]
    Stream(#[from] io::Error),

    #[error("{path}: unknown pcap magic number {magic:#010x}")]
    BadMagic { path: PathBuf, magic: u32 },

    #[error("{path}: truncated pcap file header")]
    TruncatedHeader { path: PathBuf },

    #[error("{path}: unsupported link type {linktype} (only Ethernet is supported)")]
    UnsupportedLinkType { path: PathBuf, linktype: u32 },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid data: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("scenario: {0}")]
    Scenario(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Path of the input file that caused the error, when there is one.
    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            Error::Io { path, .. }
            | Error::BadMagic { path, .. }
            | Error::TruncatedHeader { path }
            | Error::UnsupportedLinkType { path, .. }
            | Error::Parse { path, .. }
            | Error::Json { path, .. }
            | Error::Csv { path, .. } => Some(path),
            _ => None,
        }
    }
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}
