use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("code too large for exhaustive enumeration (k = {k}, limit {limit})")]
    TooLarge { k: usize, limit: usize },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("output symbol not produced by this channel: {0}")]
    UnknownSymbol(String),

    #[error("output alphabet too large: {size} symbols (limit {limit})")]
    AlphabetOverflow { size: usize, limit: usize },

    #[error("no estimate supplied for projection direction {0}")]
    MissingSubspace(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
