//! The multi-extrapolated momentum method and the SG, SG-PM, and NIGT
//! baselines, written as pure state transitions.
//!
//! Every momentum method follows the same initialization: `x^{-1} = x^0`,
//! `m^{-1} = 0`, and a first iteration that uses momentum weight 1, so
//! `m^0 = G(x^0; ξ^0)`.

mod run;

pub use run::{run, select_output_iterate, Budget, RunOptions, RunSummary, Trajectory, TrajectoryRecord};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::problems::{stochastic_grad, NoiseModel, Sample, SmoothProblem};
use crate::schedule::{DecayRule, IterationParams, ScheduleConfig};

/// Stochastic gradient access used by the step functions.
pub trait GradientOracle {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], sample: &Sample) -> Result<Vec<f64>>;
}

/// `G(x; ξ) = ∇f(x) + ξ·g(x)` for a problem and a noise model.
#[derive(Clone, Copy)]
pub struct NoisyOracle<'a> {
    pub problem: &'a dyn SmoothProblem,
    pub noise: NoiseModel,
}

impl<'a> NoisyOracle<'a> {
    pub fn new(problem: &'a dyn SmoothProblem, noise: NoiseModel) -> Self {
        Self { problem, noise }
    }
}

impl GradientOracle for NoisyOracle<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn eval(&self, x: &[f64], sample: &Sample) -> Result<Vec<f64>> {
        stochastic_grad(self.problem, &self.noise, x, sample)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum AlgorithmKind {
    /// Multi-extrapolated momentum with `schedule.q` extrapolations.
    Mem { schedule: ScheduleConfig },
    /// Plain stochastic gradient, `x⁺ = x − η_k G(x; ξ)`.
    Sg { eta: DecayRule },
    /// Normalized SGD with Polyak momentum.
    SgPm { gamma: DecayRule, eta: DecayRule },
    /// Normalized implicit gradient transport with a fixed `γ`.
    Nigt { gamma: f64, eta: DecayRule },
}

impl AlgorithmKind {
    /// Default SG-PM rules: `γ_k = (k+1)^(−1/2)` and `η_k = (k+1)^(−3/4)`.
    pub fn sgpm_default() -> Self {
        AlgorithmKind::SgPm {
            gamma: DecayRule::power(1.0, 0.5, 1.0).capped(1.0),
            eta: DecayRule::power(1.0, 0.75, 1.0),
        }
    }

    pub fn label(&self) -> String {
        match self {
            AlgorithmKind::Mem { schedule } => format!("mem(q={})", schedule.q),
            AlgorithmKind::Sg { .. } => "sg".into(),
            AlgorithmKind::SgPm { .. } => "sg-pm".into(),
            AlgorithmKind::Nigt { gamma, .. } => format!("nigt(gamma={gamma})"),
        }
    }

    /// Oracle evaluations per iteration.
    pub fn evaluations_per_iteration(&self) -> usize {
        match self {
            AlgorithmKind::Mem { schedule } => schedule.q,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmKind::Mem { schedule } => schedule.validate(),
            AlgorithmKind::Sg { eta } => eta.validate("eta"),
            AlgorithmKind::SgPm { gamma, eta } => {
                gamma.validate("gamma")?;
                eta.validate("eta")
            }
            AlgorithmKind::Nigt { gamma, eta } => {
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(Error::invalid("gamma", format!("NIGT needs a fixed gamma in (0, 1), got {gamma}")));
                }
                eta.validate("eta")
            }
        }
    }
}

/// `(x^{k−1}, x^k, m, k)` plus the parameters of the previous iteration and
/// bookkeeping counters.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub x_prev: Vec<f64>,
    pub x_cur: Vec<f64>,
    /// Latest momentum; `m^{-1} = 0` before the first step.
    pub m: Vec<f64>,
    pub k: u64,
    /// Parameters of iteration `k − 1`; the initialization row when `k = 0`.
    pub prev_params: IterationParams,
    pub oracle_calls: u64,
    pub zero_direction_events: u64,
}

impl OptimizerState {
    pub fn new(x0: Vec<f64>, q: usize) -> Self {
        let n = x0.len();
        Self {
            x_prev: x0.clone(),
            x_cur: x0,
            m: vec![0.0; n],
            k: 0,
            prev_params: IterationParams::initial(q.max(1)),
            oracle_calls: 0,
            zero_direction_events: 0,
        }
    }
}

/// `z = x + ((1 − γ)/γ)(x − x_prev)`; `γ = 1` returns `x` unchanged.
pub fn extrapolate(x_cur: &[f64], x_prev: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid("gamma", format!("extrapolation parameter must lie in (0, 1], got {gamma}")));
    }
    check_dim(x_cur.len(), x_prev.len())?;
    if gamma == 1.0 {
        return Ok(x_cur.to_vec());
    }
    let w = (1.0 - gamma) / gamma;
    Ok(x_cur.iter().zip(x_prev).map(|(x, xp)| x + w * (x - xp)).collect())
}

/// `m = (1 − Σθ_t)·m_prev + Σ θ_t·G_t`.
pub fn momentum_update(m_prev: &[f64], thetas: &[f64], grads: &[Vec<f64>]) -> Result<Vec<f64>> {
    if thetas.len() != grads.len() || thetas.is_empty() {
        return Err(Error::invalid(
            "thetas",
            format!("{} weights for {} gradients", thetas.len(), grads.len()),
        ));
    }
    for g in grads {
        check_dim(m_prev.len(), g.len())?;
    }
    let keep = 1.0 - thetas.iter().sum::<f64>();
    let mut m: Vec<f64> = m_prev.iter().map(|v| keep * v).collect();
    for (theta, g) in thetas.iter().zip(grads) {
        for (mi, gi) in m.iter_mut().zip(g) {
            *mi += theta * gi;
        }
    }
    Ok(m)
}

/// `x⁺ = x − η·m/‖m‖`. A zero direction leaves `x` in place; the second
/// return value reports that event.
pub fn normalized_step(x_cur: &[f64], m: &[f64], eta: f64) -> (Vec<f64>, bool) {
    let norm = crate::vector::norm(m);
    if norm == 0.0 {
        log::debug!("zero momentum direction; iterate left unchanged");
        return (x_cur.to_vec(), true);
    }
    let next = x_cur.iter().zip(m).map(|(x, mi)| x - eta * (mi / norm)).collect();
    (next, false)
}

/// The `q` extrapolation points of the coming iteration, built from the
/// previous iteration's `γ`.
pub fn extrapolation_points(state: &OptimizerState) -> Result<Vec<Vec<f64>>> {
    state
        .prev_params
        .gammas
        .iter()
        .map(|&g| extrapolate(&state.x_cur, &state.x_prev, g))
        .collect()
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("eta", format!("step size must be positive, got {eta}")))
    }
}

fn advance(state: &OptimizerState, m: Vec<f64>, eta: f64, calls: usize) -> OptimizerState {
    let (x_next, zero) = normalized_step(&state.x_cur, &m, eta);
    OptimizerState {
        x_prev: state.x_cur.clone(),
        x_cur: x_next,
        m,
        k: state.k + 1,
        prev_params: state.prev_params.clone(),
        oracle_calls: state.oracle_calls + calls as u64,
        zero_direction_events: state.zero_direction_events + u64::from(zero),
    }
}

/// One iteration of the multi-extrapolated momentum method.
///
/// Extrapolates with `γ_{k−1,t}`, evaluates all `q` points with the single
/// sample `ξ^k`, mixes with `θ_{k−1,t}`, then steps `η_k` along `−m^k/‖m^k‖`.
/// `params` are the parameters of iteration `k`; they become the state's
/// previous-iteration parameters.
pub fn mem_step(
    state: &OptimizerState,
    params: &IterationParams,
    oracle: &dyn GradientOracle,
    sample: &Sample,
) -> Result<OptimizerState> {
    let q = state.prev_params.q();
    if params.q() != q || params.thetas.len() != q {
        return Err(Error::invalid(
            "params",
            format!("iteration uses {} extrapolations but the state carries {q}", params.q()),
        ));
    }
    check_eta(params.eta)?;
    let points = extrapolation_points(state)?;
    let grads = points
        .iter()
        .map(|z| oracle.eval(z, sample))
        .collect::<Result<Vec<_>>>()?;
    let m = momentum_update(&state.m, &state.prev_params.thetas, &grads)?;
    let mut next = advance(state, m, params.eta, q);
    next.prev_params = params.clone();
    Ok(next)
}

/// Unnormalized stochastic gradient step. The state's momentum slot holds the
/// gradient that was used.
pub fn sg_step(state: &OptimizerState, eta_rule: &DecayRule, oracle: &dyn GradientOracle, sample: &Sample) -> Result<OptimizerState> {
    let eta = eta_rule.eval(state.k as i64);
    check_eta(eta)?;
    let g = oracle.eval(&state.x_cur, sample)?;
    let x_next = state.x_cur.iter().zip(&g).map(|(x, gi)| x - eta * gi).collect();
    Ok(OptimizerState {
        x_prev: state.x_cur.clone(),
        x_cur: x_next,
        m: g,
        k: state.k + 1,
        prev_params: state.prev_params.clone(),
        oracle_calls: state.oracle_calls + 1,
        zero_direction_events: state.zero_direction_events,
    })
}

/// Momentum weight in use at iteration `k`: 1 on the first iteration,
/// otherwise the rule at `k − 1`.
fn momentum_weight(k: u64, rule: impl Fn(i64) -> f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        rule(k as i64 - 1)
    }
}

/// `m^k = (1 − γ_{k−1})m^{k−1} + γ_{k−1}G(x^k; ξ^k)`, then a normalized step.
pub fn sgpm_step(
    state: &OptimizerState,
    gamma_rule: &DecayRule,
    eta_rule: &DecayRule,
    oracle: &dyn GradientOracle,
    sample: &Sample,
) -> Result<OptimizerState> {
    let gamma = momentum_weight(state.k, |k| gamma_rule.eval(k));
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid("gamma", format!("momentum weight {gamma} outside (0, 1]")));
    }
    let eta = eta_rule.eval(state.k as i64);
    check_eta(eta)?;
    let g = oracle.eval(&state.x_cur, sample)?;
    let m = momentum_update(&state.m, &[gamma], &[g])?;
    Ok(advance(state, m, eta, 1))
}

/// `z^k = x^k + ((1−γ)/γ)(x^k − x^{k−1})`,
/// `m^k = (1 − γ)m^{k−1} + γG(z^k; ξ^k)`, then a normalized step.
pub fn nigt_step(
    state: &OptimizerState,
    gamma: f64,
    eta_rule: &DecayRule,
    oracle: &dyn GradientOracle,
    sample: &Sample,
) -> Result<OptimizerState> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma", format!("NIGT needs a fixed gamma in (0, 1), got {gamma}")));
    }
    let gamma = momentum_weight(state.k, |_| gamma);
    let eta = eta_rule.eval(state.k as i64);
    check_eta(eta)?;
    let z = extrapolate(&state.x_cur, &state.x_prev, gamma)?;
    let g = oracle.eval(&z, sample)?;
    let m = momentum_update(&state.m, &[gamma], &[g])?;
    Ok(advance(state, m, eta, 1))
}

/// Dispatches one iteration of `kind`.
pub fn step(kind: &AlgorithmKind, state: &OptimizerState, oracle: &dyn GradientOracle, sample: &Sample) -> Result<OptimizerState> {
    match kind {
        AlgorithmKind::Mem { schedule } => {
            let params = schedule.params(state.k)?;
            mem_step(state, &params, oracle, sample)
        }
        AlgorithmKind::Sg { eta } => sg_step(state, eta, oracle, sample),
        AlgorithmKind::SgPm { gamma, eta } => sgpm_step(state, gamma, eta, oracle, sample),
        AlgorithmKind::Nigt { gamma, eta } => nigt_step(state, *gamma, eta, oracle, sample),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{quadratic_problem, NoiseModel, Xi};
    use crate::schedule::CustomRule;

    struct ConstantField(Vec<f64>);

    impl GradientOracle for ConstantField {
        fn dim(&self) -> usize {
            self.0.len()
        }

        fn eval(&self, _x: &[f64], _sample: &Sample) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }
    }

    fn no_sample(k: u64) -> Sample {
        Sample { xi: Xi::None, seed: 0, k }
    }

    #[test]
    fn extrapolate_cases() {
        assert_eq!(extrapolate(&[1.0, 2.0], &[0.0, 0.0], 1.0).unwrap(), vec![1.0, 2.0]);
        assert_eq!(extrapolate(&[1.0, 2.0], &[1.0, 2.0], 0.3).unwrap(), vec![1.0, 2.0]);
        assert_eq!(extrapolate(&[1.0], &[0.0], 0.5).unwrap(), vec![2.0]);
        assert!(extrapolate(&[1.0], &[0.0], 0.0).is_err());
        assert!(extrapolate(&[1.0], &[0.0], 1.5).is_err());
        assert!(extrapolate(&[1.0], &[0.0, 1.0], 0.5).is_err());
    }

    #[test]
    fn momentum_update_cases() {
        let g0 = vec![1.5, -2.0];
        let m = momentum_update(&g0, &[0.7, -0.2, 0.1], &[g0.clone(), g0.clone(), g0.clone()]).unwrap();
        for (a, b) in m.iter().zip(&g0) {
            assert!((a - b).abs() < 1e-15);
        }
        let a = momentum_update(&[5.0, 5.0], &[0.25, 0.75], &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = momentum_update(&[-9.0, 1e3], &[0.25, 0.75], &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(a, b);
        assert!(momentum_update(&[1.0], &[0.5], &[]).is_err());
        assert!(momentum_update(&[1.0], &[0.5], &[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn first_momentum_is_average_of_identical_evaluations() {
        let oracle = ConstantField(vec![2.0, -1.0, 0.5]);
        let state = OptimizerState::new(vec![1.0; 3], 3);
        let params = ScheduleConfig::general(4).unwrap().params(0).unwrap();
        let points = extrapolation_points(&state).unwrap();
        assert!(points.iter().all(|z| z == &state.x_cur));
        let next = mem_step(&state, &params, &oracle, &no_sample(0)).unwrap();
        for (a, b) in next.m.iter().zip(&oracle.0) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(next.oracle_calls, 3);
    }

    #[test]
    fn normalized_step_cases() {
        let (x, zero) = normalized_step(&[0.0, 0.0], &[3.0, 4.0], 1.0);
        assert!(!zero);
        assert!((x[0] + 0.6).abs() < 1e-15 && (x[1] + 0.8).abs() < 1e-15);
        let (x, zero) = normalized_step(&[1.0, 2.0], &[0.0, 0.0], 0.5);
        assert!(zero);
        assert_eq!(x, vec![1.0, 2.0]);
        let x0 = [0.3, -1.2, 4.0];
        let (x, _) = normalized_step(&x0, &[1e-3, 7.0, -2.0], 0.01);
        assert!((crate::vector::dist(&x, &x0) - 0.01).abs() < 1e-12 * 0.01);
    }

    #[test]
    fn zero_direction_is_counted() {
        let oracle = ConstantField(vec![0.0, 0.0]);
        let state = OptimizerState::new(vec![1.0, 1.0], 1);
        let kind = AlgorithmKind::sgpm_default();
        let next = step(&kind, &state, &oracle, &no_sample(0)).unwrap();
        assert_eq!(next.x_cur, state.x_cur);
        assert_eq!(next.zero_direction_events, 1);
    }

    #[test]
    fn sg_descends_on_quadratic() {
        let q = quadratic_problem(4, 10.0).unwrap();
        let oracle = NoisyOracle::new(&q, NoiseModel::none());
        let mut state = OptimizerState::new(vec![1.0; 4], 1);
        let rule = DecayRule::constant(0.05);
        let mut f = q.value(&state.x_cur).unwrap();
        for k in 0..50 {
            state = sg_step(&state, &rule, &oracle, &no_sample(k)).unwrap();
            let f_next = q.value(&state.x_cur).unwrap();
            assert!(f_next < f);
            f = f_next;
        }
        assert_eq!(state.oracle_calls, 50);
        let stationary = OptimizerState::new(vec![0.0; 4], 1);
        let next = sg_step(&stationary, &rule, &oracle, &no_sample(0)).unwrap();
        assert_eq!(next.x_cur, stationary.x_cur);
    }

    #[test]
    fn sgpm_without_memory() {
        let oracle = ConstantField(vec![1.0, 2.0]);
        let mut state = OptimizerState::new(vec![0.0, 0.0], 1);
        state.k = 5;
        state.m = vec![100.0, -100.0];
        let next = sgpm_step(&state, &DecayRule::constant(1.0), &DecayRule::constant(0.1), &oracle, &no_sample(5)).unwrap();
        assert_eq!(next.m, vec![1.0, 2.0]);
    }

    #[test]
    fn sgpm_momentum_converges_geometrically() {
        // m^{k-1} = 0 entering a constant field: the error contracts by (1 − γ) per step.
        let g0 = vec![3.0, -4.0];
        let oracle = ConstantField(g0.clone());
        let gamma = 0.2;
        let mut state = OptimizerState::new(vec![0.0, 0.0], 1);
        state.k = 1;
        let eta = DecayRule::constant(0.01);
        for j in 1..=30 {
            state = sgpm_step(&state, &DecayRule::constant(gamma), &eta, &oracle, &no_sample(j)).unwrap();
            let err = crate::vector::dist(&state.m, &g0);
            let want = (1.0f64 - gamma).powi(j as i32) * 5.0;
            assert!((err - want).abs() <= 1e-12 * 5.0, "step {j}: {err} vs {want}");
        }
    }

    #[test]
    fn nigt_with_zero_displacement_matches_sgpm() {
        let q = quadratic_problem(3, 4.0).unwrap();
        let oracle = NoisyOracle::new(&q, NoiseModel::none());
        let mut state = OptimizerState::new(vec![1.0, -1.0, 0.5], 1);
        state.k = 3;
        state.m = vec![0.2, 0.1, -0.3];
        let eta = DecayRule::constant(0.05);
        let a = nigt_step(&state, 0.3, &eta, &oracle, &no_sample(3)).unwrap();
        let b = sgpm_step(&state, &DecayRule::constant(0.3), &eta, &oracle, &no_sample(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nigt_extrapolation_point() {
        struct Probe;
        impl GradientOracle for Probe {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, x: &[f64], _s: &Sample) -> Result<Vec<f64>> {
                assert_eq!(x, &[2.0]);
                Ok(vec![1.0])
            }
        }
        let mut state = OptimizerState::new(vec![1.0], 1);
        state.x_prev = vec![0.0];
        state.k = 1;
        let next = nigt_step(&state, 0.5, &DecayRule::constant(0.1), &Probe, &no_sample(1)).unwrap();
        assert!((crate::vector::dist(&next.x_cur, &state.x_cur) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mem_step_rejects_mismatched_params() {
        let oracle = ConstantField(vec![1.0]);
        let state = OptimizerState::new(vec![0.0], 2);
        let params = ScheduleConfig::general(2).unwrap().params(0).unwrap();
        assert!(mem_step(&state, &params, &oracle, &no_sample(0)).is_err());
    }

    #[test]
    fn algorithm_validation() {
        assert!(AlgorithmKind::Nigt { gamma: 1.0, eta: DecayRule::constant(0.1) }.validate().is_err());
        assert!(AlgorithmKind::sgpm_default().validate().is_ok());
        let sched = ScheduleConfig::custom(2, CustomRule::constant(vec![0.4], 0.1)).unwrap();
        assert_eq!(AlgorithmKind::Mem { schedule: sched }.evaluations_per_iteration(), 1);
    }
}
