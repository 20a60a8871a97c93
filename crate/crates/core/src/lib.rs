//! Robust estimation of connection probabilities in partially observed
//! networks.
//!
//! The expected adjacency matrix is modelled as a low-rank inlier part `L`
//! plus a column-sparse outlier part `S + Sᵀ`. [`solver::fit`] estimates both
//! by mixed coordinate gradient descent (proximal steps on `S`,
//! conditional-gradient steps on `L`); [`inference`] turns a fit into
//! detected outliers, link predictions and community labels; [`sim`] and
//! [`harness`] generate planted networks and score the estimator on them.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod sim;
pub mod solver;

pub use error::{GsbmError, Result};
pub use harness::{ExperimentSpec, MetricsReport, Scenario};
pub use inference::{OutlierReport, PenaltyChoice, Prediction};
pub use io::ObservedGraph;
pub use linalg::{DenseMatrix, SymMatrix};
pub use sim::{GroundTruth, OutlierConfig, OutlierKind, SbmConfig};
pub use solver::{fit, FitResult, SolverConfig, SolverState};
