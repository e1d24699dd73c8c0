//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("boundary data: {0}")]
    Data(String),
    #[error("basis: {0}")]
    Basis(String),
    #[error("assembly: {0}")]
    Assembly(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("evaluation: {0}")]
    Evaluation(String),
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn file(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::File {
            path: path.into(),
            message: message.into(),
        }
    }
}
