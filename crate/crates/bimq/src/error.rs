use std::fmt::Display;
use std::path::Path;

use thiserror::Error;

/// Pipeline failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad flags, unreadable or invalid configuration.
    #[error("usage: {0}")]
    Usage(String),
    /// Missing, unreadable or inconsistent input data.
    #[error("{stage}: {path}: {message}")]
    Data { stage: &'static str, path: String, message: String },
    /// The configuration is valid but cannot be carried out on this data.
    #[error("{stage}: infeasible configuration: {message}")]
    Infeasible { stage: &'static str, message: String },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Data { .. } => 2,
            Error::Infeasible { .. } => 3,
        }
    }

    pub fn data(stage: &'static str, path: impl AsRef<Path>, message: impl Display) -> Self {
        Error::Data { stage, path: path.as_ref().display().to_string(), message: message.to_string() }
    }

    pub fn infeasible(stage: &'static str, message: impl Display) -> Self {
        Error::Infeasible { stage, message: message.to_string() }
    }

    pub fn usage(message: impl Display) -> Self {
        Error::Usage(message.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn read_text(stage: &'static str, path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::data(stage, path, e))
}

pub(crate) fn write_text(stage: &'static str, path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::data(stage, parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::data(stage, path, e))
}

pub(crate) fn write_json<T: serde::Serialize>(stage: &'static str, path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::data(stage, path, e))?;
    text.push('\n');
    write_text(stage, path, &text)
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(stage: &'static str, path: &Path) -> Result<T> {
    let text = read_text(stage, path)?;
    serde_json::from_str(&text).map_err(|e| Error::data(stage, path, e))
}
