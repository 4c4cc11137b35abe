use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("tile of {rows}x{cols} does not fit a {cap_rows}x{cap_cols} crossbar")]
    TileTooLarge {
        rows: usize,
        cols: usize,
        cap_rows: usize,
        cap_cols: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("value {value} at index {index} is outside the {alphabet} alphabet")]
    Encoding {
        value: i32,
        index: usize,
        alphabet: &'static str,
    },

    #[error("unknown mapping `{name}`; valid names: {valid}")]
    UnknownMapping { name: String, valid: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
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
}
