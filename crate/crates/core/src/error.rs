use crate::symring::SymError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("amplitude a[{k},{j}] is needed but not yet known")]
    MissingAmplitude { k: usize, j: usize },
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("quantize: {0}")]
    Quantize(String),
    #[error("reduction: {0}")]
    Reduction(String),
    #[error("config: {0}")]
    Config(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
