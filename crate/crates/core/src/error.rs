use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("channel index {index} out of range (layer has {n_channels} channels)")]
    ChannelOutOfRange { index: usize, n_channels: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("malformed data at line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
