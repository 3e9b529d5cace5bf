use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the tagging pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("discussion {discussion}: {message}")]
    Structure { discussion: String, message: String },

    #[error("value {value} outside [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("data: {0}")]
    Data(String),

    #[error("statistics: {0}")]
    Statistics(String),

    #[error("training diverged at iteration {iteration}: {message}")]
    Training { iteration: usize, message: String },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
