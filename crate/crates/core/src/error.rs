use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column `{column}`: cannot read `{value}` as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("degenerate lattice in dimension {dim}: {reason}")]
    DegenerateLattice { dim: usize, reason: String },

    #[error("empty grid: {0}")]
    EmptyGrid(String),

    #[error("capacity exceeded: {cells} cells required, budget is {budget}; restrict covariates to a grid (round or snap them) before building")]
    Capacity { cells: u128, budget: u128 },

    #[error("invalid rectangle: lower corner is not below upper corner in dimension {dim}")]
    InvalidRectangle { dim: usize },

    #[error("not estimable at {} grid point(s), first: {:?}", .points.len(), .points.first())]
    NotEstimable { points: Vec<Vec<f64>> },

    #[error("empty evaluation domain: {0}")]
    EmptyDomain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence after {iterations} sweeps, monotonicity gap {gap:e}")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("too many failed replicates: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    /// A mathematical invariant of a fitted object did not hold. This is a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error signals a broken mathematical invariant rather than bad input.
    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
