use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("source {source_id} failed after {retries} retries: {message}")]
    Source {
        source_id: usize,
        retries: u32,
        message: String,
    },

    #[error("evaluator protocol error: {0}")]
    Protocol(String),

    #[error("evaluator reported an error for request {id}: {message}")]
    Evaluator { id: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
