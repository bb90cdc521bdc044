use thiserror::Error;

/// Broad category of an error, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Resource,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("bit string capacity exceeded: {len} bits > {max}")]
    Capacity { len: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid forest: {0}")]
    InvalidForest(String),

    #[error("dangling link: tree {tree} symbol {symbol} links to missing tree {link}")]
    DanglingLink { tree: usize, symbol: usize, link: usize },

    #[error("unknown symbol {symbol} (alphabet size {alphabet})")]
    UnknownSymbol { symbol: usize, alphabet: usize },

    #[error("decode failed at bit {pos} after {decoded} symbols: {reason}")]
    Decode { pos: usize, decoded: usize, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("infeasible tree model: {0}")]
    Infeasible(String),

    #[error("branch-and-bound node budget of {budget} exceeded")]
    NodeBudget { budget: u64 },

    #[error("size limit exceeded: {0}")]
    TooLarge(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) => ErrorClass::Io,
            Error::NodeBudget { .. } | Error::TooLarge(_) => ErrorClass::Resource,
            _ => ErrorClass::Validation,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
