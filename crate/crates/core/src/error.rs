use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("value out of range: {0}")]
    Range(String),
    #[error("mixed point representations: {0}")]
    MixedRepr(&'static str),
    #[error("invalid usage: {0}")]
    Usage(String),
    #[error("invalid construction config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
