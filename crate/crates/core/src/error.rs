use thiserror::Error;

use crate::algorithm::Role;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cannot compose group elements of different variants ({0} vs {1})")]
    VariantMismatch(&'static str, &'static str),

    #[error("{0} factors do not span their matrix space")]
    DeficientSpan(Role),

    #[error("every sampled prime divides a denominator of the matrix")]
    DenominatorClash,

    #[error("algorithm is not a solution of the Brent equations")]
    NotASolution,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid value: {0}")]
    Value(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
