//! Pareto fair PCA.
//!
//! Learns a rank-r orthonormal subspace that trades total reconstruction loss
//! against per-group disparity errors with multi-objective gradient descent.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod descent;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod objectives;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{DataMatrix, Matrix, Subspace, SymMatrix};
pub use objectives::{FairPcaProblem, Mode, ObjectiveVector, Penalty, ProblemOptions};
pub use solver::{pareto_fair_pca, pareto_frontier, SolveResult, SolverConfig};
