use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "{op}: dimension mismatch between {left_rows}x{left_cols} and {right_rows}x{right_cols}"
    )]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("singular matrix: pivot magnitude {pivot:e} in column {column}")]
    Singular { pivot: f64, column: usize },

    #[error(
        "jacobi svd did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})"
    )]
    SvdNoConvergence { sweeps: usize, residual: f64 },

    #[error("{op}: non-finite input")]
    NonFinite { op: &'static str },

    #[error("{op}: matrix is not skew-symmetric (asymmetry {asymmetry:e})")]
    NotSkew { op: &'static str, asymmetry: f64 },

    #[error("{op}: matrix is not orthogonal (residual {residual:e})")]
    NotOrthogonal { op: &'static str, residual: f64 },

    #[error("series did not converge after {terms} terms")]
    SeriesNotConverged { terms: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel cache is stale; refresh the layer before reading it")]
    StaleKernel,

    #[error("{path}: bad IDX magic number {found} (expected {expected})")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("{path}: truncated file: needed {needed} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        needed: usize,
        found: usize,
    },

    #[error("{path}: dimension mismatch: {detail}")]
    IdxDimension { path: PathBuf, detail: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn mismatch(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            op,
            left_rows: left.0,
            left_cols: left.1,
            right_rows: right.0,
            right_cols: right.1,
        }
    }
}
