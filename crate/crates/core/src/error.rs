use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("product not closed: {0}")]
    ProductNotClosed(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("construction precondition failed: {0}")]
    ConstructionPrecondition(String),

    #[error("not injective: collision between inputs {x:?} and {y:?}")]
    NotInjective { x: Vec<String>, y: Vec<String> },

    #[error("verification budget exceeded: needs {needed} evaluations, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
