use thiserror::Error;

/// Errors produced by the factorization toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NmfError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix contains a non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix contains a negative value at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("matrix has zero Frobenius norm")]
    ZeroMatrix,
    #[error("selection of columns is empty")]
    EmptySelection,
    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("rank {rank} is invalid for a {rows}x{cols} target")]
    BadRank { rank: usize, rows: usize, cols: usize },
    #[error("q = {q} is invalid (must satisfy 1 <= q <= {limit})")]
    BadQ { q: usize, limit: usize },
    #[error("cluster count {k} is invalid for {n} points")]
    BadK { k: usize, n: usize },
    #[error("singular spectrum sums to zero")]
    ZeroSpectrum,
    #[error("data is degenerate: {0}")]
    DegenerateData(String),
    #[error("divergence undefined: x > 0 where the model is 0 at ({row}, {col})")]
    Domain { row: usize, col: usize },
    #[error("{0} failed to converge within its iteration cap")]
    ConvergenceFailure(&'static str),
    #[error("matrix of {rows} rows is not an image dataset of shape {image_rows}x{image_cols}")]
    NotAnImageDataset {
        rows: usize,
        image_rows: usize,
        image_cols: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, NmfError>;
