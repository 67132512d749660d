use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of a game, strategy or matrix disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The request would materialize more data than the configured caps allow.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The LP solver failed numerically or returned an impossible status.
    #[error("solver error: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed JSON in a game, profile or config file.
    #[error(transparent)]
    Format(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
