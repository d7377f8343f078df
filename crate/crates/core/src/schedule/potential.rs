//! Potential-function weights and the reporting constants of the rate bounds.

use serde::{Deserialize, Serialize};

use super::{index_base, ScheduleConfig, ScheduleMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialWeight {
    pub k: u64,
    pub value: f64,
}

/// `p_k = (k+3)^(1/5)` for the double-extrapolation schedule, otherwise
/// `p_k = (k+p)^((p−1)/(3p+1))`. The two agree at `p = 3`.
pub fn potential_weight(k: u64, config: &ScheduleConfig) -> Result<PotentialWeight> {
    let value = match config.mode {
        ScheduleMode::P3Special => (0.2 * index_base(k, 3)?.ln()).exp(),
        ScheduleMode::GeneralP | ScheduleMode::Custom => {
            let p = config.p;
            let exponent = (p - 1) as f64 / (3 * p + 1) as f64;
            (exponent * index_base(k, p)?.ln()).exp()
        }
    };
    Ok(PotentialWeight { k, value })
}

/// `(1 − Σθ_k)·p_{k+1} ≤ (1 − Σθ_k/d)·p_k` with `d = 2` for the
/// double-extrapolation schedule and `d = p + 1` otherwise.
pub fn check_potential_inequality(k: u64, config: &ScheduleConfig) -> Result<bool> {
    let sum = config.params(k)?.theta_sum;
    let divisor = match config.mode {
        ScheduleMode::P3Special => 2.0,
        _ => (config.p + 1) as f64,
    };
    let next = potential_weight(k + 1, config)?.value;
    let cur = potential_weight(k, config)?.value;
    Ok((1.0 - sum) * next <= (1.0 - sum / divisor) * cur)
}

/// Problem constants feeding the rate-bound diagnostics. These are reported,
/// never used to drive an algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// `f(x⁰) − f_low`.
    pub f0_minus_flow: f64,
    /// Bound on the stochastic-gradient standard deviation.
    pub sigma: f64,
    /// Lipschitz constant of the gradient.
    pub l1: f64,
    /// Lipschitz constant of the `p`-th derivative.
    pub lp: f64,
}

impl ProblemConstants {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f0_minus_flow", self.f0_minus_flow),
            ("sigma", self.sigma),
            ("L1", self.l1),
            ("Lp", self.lp),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

fn factorial(p: u32) -> f64 {
    (1..=p).map(f64::from).product()
}

/// Rate-bound constant. `p = 3` uses the double-extrapolation constant
/// `M_3 = 4(Δ + 19σ² + L_1 + 4L_3² + 2)`; other orders use
/// [`theorem_constant_general`].
pub fn theorem_constant(p: u32, c: &ProblemConstants) -> Result<f64> {
    if p == 3 {
        c.validate()?;
        Ok(4.0 * (c.f0_minus_flow + 19.0 * c.sigma.powi(2) + c.l1 + 4.0 * c.lp.powi(2) + 2.0))
    } else {
        theorem_constant_general(p, c)
    }
}

/// `M_p = 4(Δ + pσ² + 3L_1/2 + 7L_p²/(p!)² + 2(p + 1 + 32p^(2p)L_p² + 16(p!)²σ²))`.
pub fn theorem_constant_general(p: u32, c: &ProblemConstants) -> Result<f64> {
    if p < 2 {
        return Err(Error::invalid("p", format!("smoothness order must be >= 2, got {p}")));
    }
    c.validate()?;
    let pf = p as f64;
    let fact = factorial(p);
    let s2 = c.sigma.powi(2);
    let lp2 = c.lp.powi(2);
    Ok(4.0
        * (c.f0_minus_flow
            + pf * s2
            + 1.5 * c.l1
            + 7.0 * lp2 / (fact * fact)
            + 2.0 * (pf + 1.0 + 32.0 * pf.powf(2.0 * pf) * lp2 + 16.0 * fact * fact * s2)))
}

/// Iteration count after which the uniformly drawn output iterate is an
/// `ε`-stationary point in expectation.
///
/// `p = 3`: `max{(20M/(3ε)·ln(20M/(3ε)))^(10/3), 5}`;
/// otherwise `max{((6p+2)M/(pε)·ln((6p+2)M/(pε)))^((3p+1)/p), 2p}`.
pub fn iteration_threshold(p: u32, m: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    if p < 2 {
        return Err(Error::invalid("p", format!("smoothness order must be >= 2, got {p}")));
    }
    if !(m > 0.0) {
        return Err(Error::invalid("M", "rate constant must be positive"));
    }
    let pf = p as f64;
    let (u, exponent, floor) = if p == 3 {
        (20.0 * m / (3.0 * epsilon), 10.0 / 3.0, 5.0)
    } else {
        ((6.0 * pf + 2.0) * m / (pf * epsilon), (3.0 * pf + 1.0) / pf, 2.0 * pf)
    };
    Ok((u * u.ln()).powf(exponent).max(floor))
}
