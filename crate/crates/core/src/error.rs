use thiserror::Error;

use crate::solver::SolverTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("group index {index} out of range for {len} groups")]
    Range { index: usize, len: usize },

    #[error("invalid group pair ({0}, {0}): a pair needs two distinct groups")]
    InvalidPair(usize),

    #[error("degenerate step: {0}")]
    DegenerateStep(String),

    #[error(
        "line search failed: no step 2^-p with p <= {max_halvings} gives sufficient decrease \
         (|D|_F = {d_norm:e}, objectives = {objectives:?})"
    )]
    LineSearch {
        max_halvings: u32,
        d_norm: f64,
        objectives: Vec<f64>,
    },

    #[error("non-finite objective value at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        trace: Box<SolverTrace>,
    },

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("undefined rate: {0}")]
    UndefinedRate(String),

    #[error("{path}: row {row}, column '{column}': {message}")]
    Load {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{0}")]
    Data(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidInput(_)
            | Error::Dimension(_)
            | Error::Range { .. }
            | Error::InvalidPair(_) => 1,
            Error::Load { .. }
            | Error::Data(_)
            | Error::Encoding(_)
            | Error::Io(_)
            | Error::DegenerateLabels(_)
            | Error::UndefinedRate(_) => 2,
            Error::Numeric(_)
            | Error::DegenerateStep(_)
            | Error::LineSearch { .. }
            | Error::NonFinite { .. } => 3,
        }
    }
}
