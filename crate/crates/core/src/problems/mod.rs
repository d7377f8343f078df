//! Objective functions, the additive gradient-noise model, and datasets.

mod dataset;
mod noise;
mod objectives;

pub use dataset::{
    generate_synthetic, generate_synthetic_rows, load_csv_dataset, write_csv_dataset, Dataset,
    Provenance, SyntheticData, TargetColumn,
};
pub use noise::{stochastic_grad, NoiseKind, NoiseModel, Sample, Xi};
pub(crate) use noise::stream_rng;
pub use objectives::{
    datafit_problem, quadratic_problem, robust_loss, robust_loss_prime, robust_problem, sigmoid,
    sigmoid_prime, DataFit, Quadratic, Robust,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Smoothness information a problem can state about itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KnownConstants {
    pub l1: Option<f64>,
    pub lp: Option<f64>,
    pub p: Option<u32>,
    pub f_low: Option<f64>,
}

/// A differentiable objective with exact value and gradient.
pub trait SmoothProblem: Send + Sync {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn constants(&self) -> KnownConstants {
        KnownConstants::default()
    }

    /// `Σ_{r=1}^{order} ∇^r f(x)(v)^{r−1}/(r−1)!` when the problem can
    /// evaluate its derivative tensors exactly; `None` otherwise.
    fn gradient_taylor(&self, _x: &[f64], _v: &[f64], _order: u32) -> Option<Result<Vec<f64>>> {
        None
    }
}
