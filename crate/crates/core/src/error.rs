use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("numeric error{}: {msg}", layer.map(|l| format!(" in layer {l}")).unwrap_or_default())]
    Numeric { msg: String, layer: Option<usize> },

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {path}: truncated at byte offset {offset} (needed {needed} more bytes)")]
    Truncated {
        path: PathBuf,
        offset: u64,
        needed: u64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("io error: {path}: {source}")]
    IoAt {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("format error: json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("format error: csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short category tag, used by the CLI for exit messages.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Shape(_) => "shape",
            Error::Usage(_) => "usage",
            Error::Numeric { .. } => "numeric",
            Error::Format(_) | Error::Json(_) | Error::Csv(_) => "format",
            Error::Truncated { .. } | Error::Io(_) | Error::IoAt { .. } => "io",
        }
    }

    pub(crate) fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::IoAt { path, source }
    }
}
