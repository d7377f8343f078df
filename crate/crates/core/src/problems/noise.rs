//! Additive gradient noise `G(x; ξ) = ∇f(x) + ξ·g(x)` with the bounded,
//! non-Lipschitz envelope `g(x) = σ̃·min{√‖x‖, 1}·𝟏`.
//!
//! Two readings of `ξ` are supported: a scalar standard normal multiplying the
//! all-ones vector (the default), and an independent standard normal per
//! coordinate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SmoothProblem;
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    None,
    ScalarGaussianEnvelope,
    ElementwiseGaussianEnvelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma_tilde: f64,
}

/// Realized noise for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Xi {
    None,
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub xi: Xi,
    pub seed: u64,
    pub k: u64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            sigma_tilde: 0.0,
        }
    }

    pub fn scalar(sigma_tilde: f64) -> Self {
        Self {
            kind: NoiseKind::ScalarGaussianEnvelope,
            sigma_tilde,
        }
    }

    pub fn elementwise(sigma_tilde: f64) -> Self {
        Self {
            kind: NoiseKind::ElementwiseGaussianEnvelope,
            sigma_tilde,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != NoiseKind::None && !(self.sigma_tilde > 0.0 && self.sigma_tilde.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("noise level must be positive, got {}", self.sigma_tilde),
            ));
        }
        Ok(())
    }

    /// `σ̃·min{√‖x‖, 1}`: the common value of every coordinate of `g(x)`.
    pub fn envelope(&self, x: &[f64]) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            _ => self.sigma_tilde * crate::vector::norm(x).sqrt().min(1.0),
        }
    }

    /// `g(x)` as a vector.
    pub fn envelope_vector(&self, x: &[f64]) -> Vec<f64> {
        vec![self.envelope(x); x.len()]
    }

    /// `σ = σ̃√n`, the bound on `‖g(x)‖` and hence on the noise standard deviation.
    pub fn sigma_bound(&self, n: usize) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            _ => self.sigma_tilde * (n as f64).sqrt(),
        }
    }

    /// Draws the sample for iteration `k` of the run seeded by `seed`.
    ///
    /// Each `k` reads its own ChaCha8 stream, so the draw depends only on
    /// `(seed, k)` and not on how many samples were taken before.
    pub fn sample(&self, seed: u64, k: u64, n: usize) -> Sample {
        let xi = match self.kind {
            NoiseKind::None => Xi::None,
            NoiseKind::ScalarGaussianEnvelope => {
                let mut rng = stream_rng(seed, k);
                Xi::Scalar(StandardNormal.sample(&mut rng))
            }
            NoiseKind::ElementwiseGaussianEnvelope => {
                let mut rng = stream_rng(seed, k);
                Xi::Vector((0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            }
        };
        Sample { xi, seed, k }
    }
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `G(x; ξ)`: the exact gradient plus the realized noise scaled by the
/// envelope at `x`.
pub fn stochastic_grad(problem: &dyn SmoothProblem, noise: &NoiseModel, x: &[f64], sample: &Sample) -> Result<Vec<f64>> {
    let mut g = problem.gradient(x)?;
    match (&noise.kind, &sample.xi) {
        (NoiseKind::None, Xi::None) => {}
        (NoiseKind::ScalarGaussianEnvelope, Xi::Scalar(xi)) => {
            let shift = noise.envelope(x) * xi;
            g.iter_mut().for_each(|gi| *gi += shift);
        }
        (NoiseKind::ElementwiseGaussianEnvelope, Xi::Vector(xi)) => {
            check_dim(g.len(), xi.len())?;
            let env = noise.envelope(x);
            g.iter_mut().zip(xi).for_each(|(gi, e)| *gi += env * e);
        }
        (kind, xi) => {
            return Err(Error::invalid(
                "sample",
                format!("noise kind {kind:?} cannot use sample {xi:?}"),
            ))
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::quadratic_problem;

    #[test]
    fn no_noise_returns_exact_gradient() {
        let q = quadratic_problem(3, 5.0).unwrap();
        let x = [1.0, -1.0, 2.0];
        let noise = NoiseModel::none();
        let s = noise.sample(1, 0, 3);
        assert_eq!(stochastic_grad(&q, &noise, &x, &s).unwrap(), q.gradient(&x).unwrap());
    }

    #[test]
    fn envelope_vanishes_at_origin() {
        let q = quadratic_problem(3, 5.0).unwrap();
        let x = [0.0; 3];
        for noise in [NoiseModel::scalar(10.0), NoiseModel::elementwise(10.0)] {
            for k in 0..5 {
                let s = noise.sample(4, k, 3);
                assert_eq!(stochastic_grad(&q, &noise, &x, &s).unwrap(), vec![0.0; 3]);
            }
        }
    }

    #[test]
    fn envelope_is_bounded() {
        let noise = NoiseModel::scalar(3.0);
        for scale in [0.0, 1e-6, 0.3, 1.0, 10.0, 1e6] {
            let x = vec![scale; 5];
            assert!(crate::vector::norm(&noise.envelope_vector(&x)) <= noise.sigma_bound(5) * (1.0 + 1e-15));
        }
    }

    #[test]
    fn samples_depend_only_on_seed_and_index() {
        let noise = NoiseModel::elementwise(1.0);
        assert_eq!(noise.sample(7, 42, 4), noise.sample(7, 42, 4));
        assert_ne!(noise.sample(7, 42, 4).xi, noise.sample(7, 43, 4).xi);
        assert_ne!(noise.sample(7, 42, 4).xi, noise.sample(8, 42, 4).xi);
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let q = quadratic_problem(2, 1.0).unwrap();
        let s = NoiseModel::scalar(1.0).sample(0, 0, 2);
        assert!(stochastic_grad(&q, &NoiseModel::elementwise(1.0), &[1.0, 1.0], &s).is_err());
        assert!(NoiseModel::scalar(0.0).validate().is_err());
        assert!(NoiseModel::none().validate().is_ok());
    }
}
