use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid stochastic matrix: {0}")]
    InvalidStochastic(String),
    #[error("not a state: {0}")]
    NotAState(String),
    #[error("not Hermitian: {0}")]
    NotHermitian(String),
    #[error("fixed space and coboundary range do not split the algebra: {0}")]
    SumNotDirect(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
