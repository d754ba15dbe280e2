use std::path::PathBuf;

/// Errors produced by the simulation library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A grid, packet, aperture, kernel or run parameter is out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation removed all probability from a state.
    #[error("empty state: {0}")]
    EmptyState(String),

    /// A branch Gram matrix is not a valid overlap matrix.
    #[error("invalid entanglement: {0}")]
    InvalidEntanglement(String),

    /// A pattern estimator could not find the features it needs.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// A physical invariant failed; this points at a numerics bug.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// A configuration file could not be parsed.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by invalid user input rather than by the run itself.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
