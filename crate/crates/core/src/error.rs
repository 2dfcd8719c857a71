use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("labels: {0}")]
    InvalidLabels(String),
    #[error("negative distance {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: String },
    #[error("not a pseudoultrametric: {0}")]
    NotPseudoultrametric(String),
    #[error("invalid distance set descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("function is not increasing on the distance set: f({lo}) = {f_lo} > f({hi}) = {f_hi}")]
    NotIncreasingOnDistances { lo: String, f_lo: String, hi: String, f_hi: String },
    #[error("invalid bijection: {0}")]
    InvalidBijection(String),
    #[error("spaces have different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("invalid scaling function: {0}")]
    InvalidScaling(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid dendrogram: {0}")]
    InvalidDendrogram(String),
}
