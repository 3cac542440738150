use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("scheme `{scheme}` cannot simulate this model: {reason}")]
    UnsupportedScheme { scheme: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("summary error: {0}")]
    Summary(String),

    #[error("run error: {0}")]
    Run(String),

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("ingestion error: {0}")]
    Ingest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
