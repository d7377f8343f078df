//! Multi-extrapolated momentum for stochastic nonconvex optimization under
//! high-order smoothness, with baselines, test problems, and numerical checks.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod harness;
pub mod optimizer;
pub mod problems;
pub mod schedule;
pub mod vector;
pub mod verify;

pub use error::{Error, Result};
