//! Exact line search for linear models trained with the AUM loss.
//!
//! The Area Under Min(FP, FN) is a differentiable surrogate for the ROC AUC.
//! Along a descent direction both AUM and AUC are piecewise functions of the
//! step size, and [`path`] computes every piece exactly by sweeping over the
//! step sizes where breakpoint thresholds cross.

// `!(x >= 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod descent;
pub mod error;
pub mod error_model;
pub mod io;
pub mod linear;
pub mod path;
pub mod roc;
pub mod synth;

pub use error::{Error, Result};
pub use error_model::{binary_breakpoints, load_breakpoints, load_labels, Breakpoint, ErrorModel, ExampleIds};
pub use linear::{predict, predict_at};
pub use path::{line_search, Objective, PathState, Segment, StepPath, Variant};
pub use roc::{aum, grid_evaluate, roc, roc_with_tolerance, GridPoint, RocCurve};
