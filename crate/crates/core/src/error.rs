use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("embedding capacity exceeded: {needed} logical variables, graph holds {capacity}")]
    Capacity { needed: usize, capacity: usize },
    #[error("embedding infeasible: {0}")]
    EmbeddingInfeasible(String),
    #[error("empty grid: {0}")]
    EmptyGrid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            Error::Argument(_) | Error::Parse { .. } | Error::UnsupportedFormat(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
