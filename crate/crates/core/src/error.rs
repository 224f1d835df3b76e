use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the mapping toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("token {position}: expected a non-negative integer, found `{token}`")]
    MalformedToken { position: usize, token: String },

    #[error("token {position}: negative entry {value}")]
    NegativeEntry { position: usize, value: i64 },

    #[error("token {position}: instance order must be at least 2, found {n}")]
    OrderTooSmall { position: usize, n: i64 },

    #[error("wrong token count: expected {expected} tokens after the order, found {found}")]
    WrongTokenCount { expected: usize, found: usize },

    #[error("{matrix} matrix must be {n}x{n} ({expected} entries), found {found}")]
    MatrixShape {
        matrix: &'static str,
        n: usize,
        expected: usize,
        found: usize,
    },

    #[error("{matrix} matrix has a non-zero diagonal entry at {index}")]
    NonZeroDiagonal { matrix: &'static str, index: usize },

    #[error("{matrix} matrix has a negative entry at ({row}, {col})")]
    NegativeMatrixEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("assignment is not a permutation of 0..{n}")]
    NotAPermutation { n: usize },

    #[error("known optimum must be positive, found {0}")]
    NonPositiveOptimum(i64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown parameter `{name}`; valid names: {valid}")]
    UnknownParameter { name: String, valid: String },

    #[error("population too small: need at least {needed}, found {found}")]
    PopulationTooSmall { needed: usize, found: usize },

    #[error("instance order {n} exceeds the exhaustive search limit of {limit}")]
    OracleLimit { n: usize, limit: usize },

    #[error("optima file line {line}: {message}")]
    OptimaFile { line: usize, message: String },

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
