use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed input file. `location` is a byte offset or `path:line`.
    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("Hamiltonian is gapless on the grid (min |d(k)| = {min_gap:.3e})")]
    Gapless { min_gap: f64 },

    #[error("Chern number not converged: raw value {value}, rounding residual {residual:.3e}")]
    NotConverged { value: f64, residual: f64 },
}

impl From<std::num::ParseFloatError> for Error {
    fn from(e: std::num::ParseFloatError) -> Self {
        Error::invalid(e.to_string())
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn at_offset(offset: u64, message: impl Into<String>) -> Self {
        Error::Format { location: format!("byte offset {offset}"), message: message.into() }
    }

    pub fn at_line(source: impl std::fmt::Display, line: usize, message: impl Into<String>) -> Self {
        Error::Format { location: format!("{source}:{line}"), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 2,
            Error::Format { .. } | Error::Io { .. } => 3,
            Error::Gapless { .. } | Error::NotConverged { .. } => 4,
        }
    }
}
