//! Step sizes, extrapolation parameters, and momentum weights.
//!
//! Two parameter families are provided: the general order-`p` schedule with
//! `q = p − 1` extrapolations, and the double-extrapolation (`p = 3`, `q = 2`)
//! schedule written out with its own formulas. A custom mode accepts user
//! extrapolation rules and derives the weights from them.
//!
//! Powers of `k + p` are evaluated once per iteration as `exp(α·ln(k + p))`
//! and shared by every quantity of that iteration.

mod potential;
mod weights;

pub use potential::{
    check_potential_inequality, iteration_threshold, potential_weight, theorem_constant,
    theorem_constant_general, ProblemConstants, PotentialWeight,
};
pub use weights::{
    relative_residual, solve_weights_closed_form, solve_weights_linear, weight_matrix,
    weight_sum_closed_form, MAX_CONDITION, MAX_DENSE_ORDER,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative residual accepted by [`validate`].
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Largest `k + p` for which the iteration index is exact in `f64`.
const MAX_EXACT_INDEX: u64 = 1 << 53;

/// Parameters used by one iteration of the momentum method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationParams {
    /// Iteration index; `-1` marks the initialization row.
    pub k: i64,
    pub eta: f64,
    pub gammas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub theta_sum: f64,
}

impl IterationParams {
    fn new(k: i64, eta: f64, gammas: Vec<f64>, thetas: Vec<f64>) -> Self {
        let theta_sum = thetas.iter().sum();
        Self {
            k,
            eta,
            gammas,
            thetas,
            theta_sum,
        }
    }

    /// The row used before the first iteration: `γ = 1` and `θ = 1/q` for
    /// every extrapolation. Its step size is never used and is stored as 0.
    pub fn initial(q: usize) -> Self {
        assert!(q >= 1, "at least one extrapolation is required");
        Self::new(-1, 0.0, vec![1.0; q], vec![1.0 / q as f64; q])
    }

    pub fn q(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_initial(&self) -> bool {
        self.k < 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    GeneralP,
    P3Special,
    Custom,
}

/// `scale · (k + offset)^(−exponent)`, optionally capped at `cap`.
///
/// Evaluated at an index where `k + offset ≤ 0` the rule returns `cap` when a
/// cap is set; otherwise it is an error to ask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRule {
    pub scale: f64,
    pub exponent: f64,
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

impl DecayRule {
    pub fn constant(value: f64) -> Self {
        Self {
            scale: value,
            exponent: 0.0,
            offset: 1.0,
            cap: None,
        }
    }

    pub fn power(scale: f64, exponent: f64, offset: f64) -> Self {
        Self {
            scale,
            exponent,
            offset,
            cap: None,
        }
    }

    pub fn capped(mut self, cap: f64) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn eval(&self, k: i64) -> f64 {
        let base = k as f64 + self.offset;
        let raw = if self.exponent == 0.0 {
            self.scale
        } else if base > 0.0 {
            self.scale * (-self.exponent * base.ln()).exp()
        } else {
            f64::INFINITY
        };
        match self.cap {
            Some(cap) => raw.min(cap),
            None => raw,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::invalid(name, "scale must be positive and finite"));
        }
        if !(self.exponent >= 0.0 && self.exponent.is_finite()) {
            return Err(Error::invalid(name, "exponent must be nonnegative"));
        }
        if self.exponent > 0.0 && self.offset <= 0.0 && self.cap.is_none() {
            return Err(Error::invalid(name, "offset must be positive for a decaying rule"));
        }
        Ok(())
    }
}

/// User-supplied extrapolation rule for custom mode.
///
/// `γ_{k,t} = coefficient_t · (k + offset)^(−exponent)`; the weights follow
/// from the closed-form solution. No guidance exists for choosing these, so
/// custom schedules are experimental.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomRule {
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub exponent: f64,
    #[serde(default = "one")]
    pub offset: f64,
    pub eta: DecayRule,
}

fn one() -> f64 {
    1.0
}

impl CustomRule {
    /// Constant extrapolation parameters and a constant step size.
    pub fn constant(gammas: Vec<f64>, eta: f64) -> Self {
        Self {
            coefficients: gammas,
            exponent: 0.0,
            offset: 1.0,
            eta: DecayRule::constant(eta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub p: u32,
    pub q: usize,
    pub mode: ScheduleMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomRule>,
    /// Multiplier on every step size; 1 reproduces the schedule as written.
    #[serde(default = "one")]
    pub eta_scale: f64,
}

impl ScheduleConfig {
    pub fn general(p: u32) -> Result<Self> {
        let cfg = Self {
            p,
            q: p.saturating_sub(1) as usize,
            mode: ScheduleMode::GeneralP,
            custom: None,
            eta_scale: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn p3() -> Self {
        Self {
            p: 3,
            q: 2,
            mode: ScheduleMode::P3Special,
            custom: None,
            eta_scale: 1.0,
        }
    }

    /// Custom schedule; `p` only feeds the potential-weight diagnostics.
    pub fn custom(p: u32, rule: CustomRule) -> Result<Self> {
        let cfg = Self {
            p,
            q: rule.coefficients.len(),
            mode: ScheduleMode::Custom,
            custom: Some(rule),
            eta_scale: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_eta_scale(mut self, scale: f64) -> Self {
        self.eta_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::invalid("p", format!("smoothness order must be >= 2, got {}", self.p)));
        }
        if self.q < 1 {
            return Err(Error::invalid("q", "at least one extrapolation is required"));
        }
        if !(self.eta_scale > 0.0 && self.eta_scale.is_finite()) {
            return Err(Error::invalid("eta_scale", "must be positive and finite"));
        }
        match self.mode {
            ScheduleMode::GeneralP | ScheduleMode::P3Special => {
                if self.q != self.p as usize - 1 {
                    return Err(Error::invalid(
                        "q",
                        format!("built-in schedules use q = p - 1 = {}, got {}", self.p - 1, self.q),
                    ));
                }
                if self.mode == ScheduleMode::P3Special && self.p != 3 {
                    return Err(Error::invalid("p", "the double-extrapolation schedule requires p = 3"));
                }
            }
            ScheduleMode::Custom => {
                let rule = self
                    .custom
                    .as_ref()
                    .ok_or_else(|| Error::invalid("custom", "custom mode needs an extrapolation rule"))?;
                if rule.coefficients.len() != self.q {
                    return Err(Error::invalid("q", "must equal the number of custom coefficients"));
                }
                rule.eta.validate("eta")?;
                if !(rule.exponent >= 0.0) || (rule.exponent > 0.0 && rule.offset <= 0.0) {
                    return Err(Error::invalid("custom", "exponent must be >= 0 with a positive offset"));
                }
                // The first iteration's parameters must already be admissible.
                custom_params(rule, 0)?;
            }
        }
        Ok(())
    }

    /// Parameters of iteration `k` (with `eta_scale` applied).
    pub fn params(&self, k: u64) -> Result<IterationParams> {
        let mut params = match self.mode {
            ScheduleMode::GeneralP => params_general(k, self.p)?,
            ScheduleMode::P3Special => params_p3(k)?,
            ScheduleMode::Custom => {
                let rule = self
                    .custom
                    .as_ref()
                    .ok_or_else(|| Error::invalid("custom", "custom mode needs an extrapolation rule"))?;
                custom_params(rule, k)?
            }
        };
        params.eta *= self.eta_scale;
        Ok(params)
    }
}

fn index_base(k: u64, p: u32) -> Result<f64> {
    match k.checked_add(p as u64) {
        Some(n) if n <= MAX_EXACT_INDEX => Ok(n as f64),
        _ => Err(Error::invalid(
            "k",
            format!("iteration index {k} exceeds the range representable in f64"),
        )),
    }
}

/// General order-`p` schedule with `q = p − 1`:
/// `η_k = (k+p)^(−(2p+1)/(3p+1))`, `γ_{k,t} = 1/(t·(k+p)^(2p/(3p+1)))`, and
/// `θ_k` from the closed-form weight solution.
pub fn params_general(k: u64, p: u32) -> Result<IterationParams> {
    if p < 2 {
        return Err(Error::invalid("p", format!("smoothness order must be >= 2, got {p}")));
    }
    let ln_base = index_base(k, p)?.ln();
    let denom = (3 * p + 1) as f64;
    let c = ((2 * p) as f64 / denom * ln_base).exp();
    let eta = (-((2 * p + 1) as f64) / denom * ln_base).exp();
    if !c.is_finite() || !eta.is_finite() || eta <= 0.0 {
        return Err(Error::invalid("k", "schedule powers overflow f64"));
    }
    let gammas: Vec<f64> = (1..p).map(|t| 1.0 / (t as f64 * c)).collect();
    let thetas = weights::closed_form_unchecked(&gammas);
    if thetas.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("k", "momentum weights overflow f64"));
    }
    Ok(IterationParams::new(k as i64, eta, gammas, thetas))
}

/// Double-extrapolation schedule (`p = 3`, `q = 2`) with `c = (k+3)^(3/5)`:
/// `η = (k+3)^(−7/10)`, `γ = (1/c, 1/(2c))`,
/// `θ_1 = (2c − 1)/c²`, `θ_2 = (1 − c)/(2c²)`.
pub fn params_p3(k: u64) -> Result<IterationParams> {
    let ln_base = index_base(k, 3)?.ln();
    let c = (3.0 / 5.0 * ln_base).exp();
    let eta = (-7.0 / 10.0 * ln_base).exp();
    let c2 = c * c;
    let gammas = vec![1.0 / c, 1.0 / (2.0 * c)];
    let thetas = vec![(2.0 * c - 1.0) / c2, (1.0 - c) / (2.0 * c2)];
    Ok(IterationParams::new(k as i64, eta, gammas, thetas))
}

fn custom_params(rule: &CustomRule, k: u64) -> Result<IterationParams> {
    let factor = if rule.exponent == 0.0 {
        1.0
    } else {
        (-rule.exponent * (k as f64 + rule.offset).ln()).exp()
    };
    let gammas: Vec<f64> = rule.coefficients.iter().map(|c| c * factor).collect();
    let thetas = solve_weights_closed_form(&gammas)?;
    let eta = rule.eta.eval(k as i64);
    Ok(IterationParams::new(k as i64, eta, gammas, thetas))
}

/// Consistency report for one [`IterationParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDiagnostics {
    pub k: i64,
    pub max_relative_residual: f64,
    pub residual_ok: bool,
    pub sum_in_unit_interval: bool,
    pub signs_alternate: bool,
}

impl ScheduleDiagnostics {
    pub fn passed(&self) -> bool {
        self.residual_ok && self.sum_in_unit_interval && self.signs_alternate
    }
}

/// Checks the weight system, `Σθ ∈ (0, 1)`, and the alternating sign pattern.
pub fn validate(params: &IterationParams) -> ScheduleDiagnostics {
    let residual = if params.gammas.len() == params.thetas.len() {
        relative_residual(&params.gammas, &params.thetas)
    } else {
        f64::INFINITY
    };
    let signs_alternate = params.thetas.iter().enumerate().all(|(t, th)| {
        if t % 2 == 0 {
            *th > 0.0
        } else {
            *th < 0.0
        }
    });
    ScheduleDiagnostics {
        k: params.k,
        max_relative_residual: residual,
        residual_ok: residual <= RESIDUAL_TOLERANCE,
        sum_in_unit_interval: params.theta_sum > 0.0 && params.theta_sum < 1.0,
        signs_alternate,
    }
}
