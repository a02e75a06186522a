use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid multidegree ({i}, {l}) for d = {d}")]
    InvalidMultidegree { d: usize, i: usize, l: usize },
    #[error("inner space is not contained in the outer space")]
    NotContained,
    #[error("target vector is not in the image")]
    NotInImage,
    #[error("zero-dimensional series has no vanishing sequence")]
    EmptySeries,
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("prerequisite violated at cell ({i}, {l}): {reason}")]
    Prerequisite { i: usize, l: usize, reason: String },
    #[error("closure failure: {0}")]
    Closure(String),
    #[error("replay failed at cell ({i}, {l}): {reason}")]
    Replay { i: usize, l: usize, reason: String },
    #[error("inconsistent uniqueness evidence: {0}")]
    Inconsistent(String),
    #[error("realizability failure: {0}")]
    Unrealizable(String),
    #[error("enumeration limit of {0} grids exceeded")]
    EnumerationLimit(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
