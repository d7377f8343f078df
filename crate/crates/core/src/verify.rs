//! Independent numerical checks of the problems, the noise model, and the
//! schedule. The weight checks compare the production closed form against a
//! dense linear solve; they never use the closed form as their own reference.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::problems::{stochastic_grad, NoiseModel, SmoothProblem};
use crate::schedule::{
    check_potential_inequality, relative_residual, solve_weights_linear, validate, weight_sum_closed_form,
    ScheduleConfig, ScheduleMode, RESIDUAL_TOLERANCE,
};
use crate::vector::{dist, norm, sub};

/// Outcome of one check. `worst_case` is the largest violation, residual, or
/// test statistic seen; `detail` states the tolerance it was held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub worst_case: f64,
    pub samples: u64,
    pub detail: String,
}

impl CheckReport {
    fn new(name: impl Into<String>, passed: bool, worst_case: f64, samples: u64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            worst_case,
            samples,
            detail: detail.into(),
        }
    }
}

/// Agreement tolerance between the closed-form and dense weights.
pub const AGREEMENT_TOLERANCE: f64 = 1e-8;
/// Tolerance on `|Σθ − (1 − Π(1 − γ))| / |Σθ|`.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Relative tolerance of the finite-difference gradient check.
pub const GRADIENT_TOLERANCE: f64 = 1e-6;

pub(crate) fn rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    crate::problems::stream_rng(seed, stream)
}

/// Central differences `(f(x + h e_i) − f(x − h e_i)) / (2h)`.
pub fn finite_diff_grad<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central differences with a per-coordinate step `h·max(1, |x_i|)`.
fn scaled_fd_grad(problem: &dyn SmoothProblem, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let hi = h * x[i].abs().max(1.0);
        probe[i] = x[i] + hi;
        let up = problem.value(&probe)?;
        probe[i] = x[i] - hi;
        let down = problem.value(&probe)?;
        probe[i] = x[i];
        g.push((up - down) / (2.0 * hi));
    }
    Ok(g)
}

fn uniform_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-radius..radius)).collect()
}

fn unit_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let len = norm(&v);
        if len > 0.0 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Analytic gradient against central differences at `points` seeded points in
/// `[−2, 2]^n`; the statistic is `‖∇f − g_fd‖ / ‖∇f‖`.
pub fn gradient_check(problem: &dyn SmoothProblem, points: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let x = uniform_point(&mut rng, problem.dim(), 2.0);
        let g = problem.gradient(&x)?;
        let fd = scaled_fd_grad(problem, &x, 1e-5)?;
        worst = worst.max(dist(&g, &fd) / norm(&g).max(1e-12));
    }
    Ok(CheckReport::new(
        format!("gradient:{}", problem.name()),
        worst <= GRADIENT_TOLERANCE,
        worst,
        points as u64,
        format!("relative error vs central differences, tolerance {GRADIENT_TOLERANCE:e}"),
    ))
}

fn factorial(p: u32) -> f64 {
    (1..=p).map(f64::from).product()
}

/// `∇f(y) − Σ_{r=1}^{p} ∇^r f(x)[v]^{r−1}/(r−1)!` for `v = y − x`, using the
/// problem's exact expansion when it has one and finite-difference
/// Hessian-vector products for `p = 2` otherwise.
fn taylor_remainder(problem: &dyn SmoothProblem, x: &[f64], y: &[f64], p: u32) -> Result<f64> {
    let v = sub(y, x);
    let gy = problem.gradient(y)?;
    if p == 1 {
        return Ok(dist(&gy, &problem.gradient(x)?));
    }
    if let Some(expansion) = problem.gradient_taylor(x, &v, p) {
        return Ok(dist(&gy, &expansion?));
    }
    if p != 2 {
        return Err(Error::Unsupported(format!(
            "order-{p} Taylor expansion is not available for {}",
            problem.name()
        )));
    }
    let len = norm(&v);
    let gx = problem.gradient(x)?;
    if len == 0.0 {
        return Ok(dist(&gy, &gx));
    }
    let h = 1e-4;
    let shifted = |s: f64| -> Vec<f64> { x.iter().zip(&v).map(|(xi, vi)| xi + s * h * vi / len).collect() };
    let up = problem.gradient(&shifted(1.0))?;
    let down = problem.gradient(&shifted(-1.0))?;
    let expansion: Vec<f64> = (0..x.len())
        .map(|i| gx[i] + len * (up[i] - down[i]) / (2.0 * h))
        .collect();
    Ok(dist(&gy, &expansion))
}

/// Checks `‖∇f(y) − T_p(x; y)‖ ≤ (L_p/p!)‖y − x‖^p` at one pair.
///
/// `p = 1` reads as the gradient Lipschitz condition. Without a known `L_p`
/// the report carries the ratio `remainder / ‖y − x‖^p` and passes when it is
/// finite.
pub fn taylor_remainder_check(problem: &dyn SmoothProblem, x: &[f64], y: &[f64], p: u32) -> Result<CheckReport> {
    check_dim(problem.dim(), x.len())?;
    check_dim(problem.dim(), y.len())?;
    if p == 0 {
        return Err(Error::invalid("p", "order must be at least 1"));
    }
    let remainder = taylor_remainder(problem, x, y, p)?;
    let len = dist(x, y);
    let constants = problem.constants();
    let lipschitz = match p {
        1 => constants.l1,
        _ if constants.p == Some(p) => constants.lp,
        _ => None,
    };
    let name = format!("taylor:{}:p{p}", problem.name());
    let report = match lipschitz {
        Some(l) => {
            let bound = l / factorial(p) * len.powi(p as i32);
            // Rounding slack relative to the gradient scale.
            let slack = 1e-12 * norm(&problem.gradient(y)?).max(1.0);
            CheckReport::new(
                name,
                remainder <= bound + slack,
                remainder,
                1,
                format!("bound (L/{p}!)|y-x|^{p} = {bound:e}"),
            )
        }
        None => {
            let ratio = if len > 0.0 { remainder / len.powi(p as i32) } else { 0.0 };
            CheckReport::new(
                name,
                ratio.is_finite(),
                ratio,
                1,
                format!("empirical estimate of L_{p}/{p}! (no known constant)"),
            )
        }
    };
    Ok(report)
}

/// Largest `remainder / ‖y − x‖^p` over `pairs` seeded pairs with `x` in
/// `[−1, 1]^n` and `0 < ‖y − x‖ ≤ radius`. The result is an empirical
/// estimate of `L_p/p!`, not a certified constant.
pub fn taylor_envelope(problem: &dyn SmoothProblem, p: u32, pairs: usize, radius: f64, seed: u64) -> Result<CheckReport> {
    if !(radius > 0.0) {
        return Err(Error::invalid("radius", "must be positive"));
    }
    let mut rng = rng(seed, 1);
    let n = problem.dim();
    let mut worst: f64 = 0.0;
    let mut passed = true;
    for _ in 0..pairs {
        let x = uniform_point(&mut rng, n, 1.0);
        let u = unit_direction(&mut rng, n);
        let len = radius * (1.0 - rng.random::<f64>());
        let y: Vec<f64> = x.iter().zip(&u).map(|(xi, ui)| xi + len * ui).collect();
        let report = taylor_remainder_check(problem, &x, &y, p)?;
        passed &= report.passed;
        let ratio = taylor_remainder(problem, &x, &y, p)? / len.powi(p as i32);
        worst = worst.max(ratio);
    }
    Ok(CheckReport::new(
        format!("taylor-envelope:{}:p{p}", problem.name()),
        passed && worst.is_finite(),
        worst,
        pairs as u64,
        format!("max remainder/|y-x|^{p}; empirical estimate of L_{p}/{p}!"),
    ))
}

/// Mean and standard error of a sample.
fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

fn within(diff: f64, se: f64, multiple: f64) -> (bool, f64) {
    if se == 0.0 {
        (diff == 0.0, if diff == 0.0 { 0.0 } else { f64::INFINITY })
    } else {
        let z = diff / se;
        (z <= multiple, z)
    }
}

/// Monte-Carlo check that `E G(x; ξ) = ∇f(x)`: every coordinate mean lies
/// within 4 standard errors of the exact gradient.
pub fn noise_unbiasedness_check(
    problem: &dyn SmoothProblem,
    noise: &NoiseModel,
    x: &[f64],
    draws: usize,
    seed: u64,
) -> Result<CheckReport> {
    check_dim(problem.dim(), x.len())?;
    if draws < 2 {
        return Err(Error::invalid("draws", "need at least two draws"));
    }
    let n = x.len();
    let grad = problem.gradient(x)?;
    let mut columns = vec![Vec::with_capacity(draws); n];
    for i in 0..draws {
        let sample = noise.sample(seed, i as u64, n);
        let g = stochastic_grad(problem, noise, x, &sample)?;
        for (col, gi) in columns.iter_mut().zip(g) {
            col.push(gi);
        }
    }
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for (col, gi) in columns.iter().zip(&grad) {
        let (mean, se) = mean_se(col);
        // Samples that all equal the gradient can differ from it only by rounding.
        let (ok, z) = within((mean - gi).abs(), se.max(1e-15 * gi.abs()), 4.0);
        passed &= ok;
        worst = worst.max(z);
    }
    Ok(CheckReport::new(
        "noise:unbiased",
        passed,
        worst,
        draws as u64,
        "max |mean - grad| in standard errors, tolerance 4",
    ))
}

/// `‖∇f(y) − ∇f(x)‖² + ‖g(y) − g(x)‖²`, the exact second moment of
/// `G(y; ξ) − G(x; ξ)` under a shared sample.
pub fn second_moment_exact(problem: &dyn SmoothProblem, noise: &NoiseModel, x: &[f64], y: &[f64]) -> Result<f64> {
    let dg = dist(&problem.gradient(y)?, &problem.gradient(x)?);
    let de = dist(&noise.envelope_vector(y), &noise.envelope_vector(x));
    Ok(dg * dg + de * de)
}

/// Monte-Carlo estimate of `E‖G(y; ξ) − G(x; ξ)‖²` compared with the exact
/// value; passes within 3 standard errors.
pub fn noise_moment_check(
    problem: &dyn SmoothProblem,
    noise: &NoiseModel,
    x: &[f64],
    y: &[f64],
    draws: usize,
    seed: u64,
) -> Result<CheckReport> {
    check_dim(problem.dim(), x.len())?;
    check_dim(problem.dim(), y.len())?;
    if draws < 2 {
        return Err(Error::invalid("draws", "need at least two draws"));
    }
    let exact = second_moment_exact(problem, noise, x, y)?;
    let n = x.len();
    let values = (0..draws)
        .map(|i| {
            let sample = noise.sample(seed, i as u64, n);
            let gy = stochastic_grad(problem, noise, y, &sample)?;
            let gx = stochastic_grad(problem, noise, x, &sample)?;
            Ok(dist(&gy, &gx).powi(2))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, se) = mean_se(&values);
    let (passed, z) = within((mean - exact).abs(), se.max(1e-12 * exact), 3.0);
    Ok(CheckReport::new(
        "noise:second-moment",
        passed,
        z,
        draws as u64,
        format!("estimate {mean:e} vs exact {exact:e}; |diff| in standard errors, tolerance 3"),
    ))
}

/// `E‖G(y) − G(x)‖² / ‖y − x‖²` at `y = x + δ e_1`.
pub fn smoothness_ratio(problem: &dyn SmoothProblem, noise: &NoiseModel, x: &[f64], delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", "must be positive"));
    }
    check_dim(problem.dim(), x.len())?;
    let mut y = x.to_vec();
    y[0] += delta;
    Ok(second_moment_exact(problem, noise, x, &y)? / (delta * delta))
}

/// Shows that no mean-squared-smoothness constant exists: the ratio must grow
/// by at least `1.9` each time `δ` halves.
pub fn smoothness_divergence_check(
    problem: &dyn SmoothProblem,
    noise: &NoiseModel,
    x: &[f64],
    deltas: &[f64],
) -> Result<CheckReport> {
    let mut worst = f64::INFINITY;
    for &d in deltas {
        let growth = smoothness_ratio(problem, noise, x, d / 2.0)? / smoothness_ratio(problem, noise, x, d)?;
        worst = worst.min(growth);
    }
    Ok(CheckReport::new(
        "noise:smoothness-divergence",
        worst >= 1.9,
        worst,
        deltas.len() as u64,
        "smallest ratio(delta/2)/ratio(delta), required >= 1.9",
    ))
}

/// Aggregates of [`schedule_cross_stats`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CrossCheckStats {
    pub samples: u64,
    /// Largest relative residual of the weight system.
    pub max_residual: f64,
    /// Largest componentwise `|θ_t − θ_t^dense| / |θ_t^dense|`.
    pub max_agreement: f64,
    /// Largest relative gap between `Σθ_t` and `1 − Π(1 − γ_t)`.
    pub max_sum_error: f64,
    pub sign_violations: u64,
    pub sum_range_violations: u64,
}

/// Sweeps `k = 0..=k_max` of the general order-`p` schedule.
pub fn schedule_cross_stats(p: u32, k_max: u64) -> Result<CrossCheckStats> {
    if !(2..=6).contains(&p) {
        return Err(Error::invalid("p", format!("sweeps cover 2 <= p <= 6, got {p}")));
    }
    let config = ScheduleConfig::general(p)?;
    let mut s = CrossCheckStats::default();
    for k in 0..=k_max {
        let params = config.params(k)?;
        let diag = validate(&params);
        s.max_residual = s.max_residual.max(diag.max_relative_residual);
        s.sign_violations += u64::from(!diag.signs_alternate);
        s.sum_range_violations += u64::from(!diag.sum_in_unit_interval);

        let dense = solve_weights_linear(&params.gammas)?;
        let gap = params
            .thetas
            .iter()
            .zip(&dense)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / b.abs()));
        s.max_agreement = s.max_agreement.max(gap);

        let elementwise: f64 = params.thetas.iter().sum();
        let closed = weight_sum_closed_form(&params.gammas)?;
        s.max_sum_error = s.max_sum_error.max((elementwise - closed).abs() / closed.abs());
        s.samples += 1;
    }
    Ok(s)
}

/// Weight-system residual, dense-solve agreement, sum identity, and sign
/// pattern over `k = 0..=k_max`.
pub fn schedule_cross_check(p: u32, k_max: u64) -> Result<CheckReport> {
    let s = schedule_cross_stats(p, k_max)?;
    let passed = s.max_residual <= RESIDUAL_TOLERANCE
        && s.max_agreement <= AGREEMENT_TOLERANCE
        && s.max_sum_error <= SUM_TOLERANCE
        && s.sign_violations == 0
        && s.sum_range_violations == 0;
    Ok(CheckReport::new(
        format!("schedule:p{p}"),
        passed,
        s.max_residual,
        s.samples,
        format!(
            "residual {:e} (tol {RESIDUAL_TOLERANCE:e}); dense agreement {:e} (tol {AGREEMENT_TOLERANCE:e}); \
             sum identity {:e} (tol {SUM_TOLERANCE:e}); sign violations {}; sum-range violations {}",
            s.max_residual, s.max_agreement, s.max_sum_error, s.sign_violations, s.sum_range_violations
        ),
    ))
}

/// Violation counts of [`bound_sweep_stats`]. `worst_ratio` is the largest
/// `lhs / rhs` over every bound checked; all bounds hold iff it is below 1
/// (at most 1 for the non-strict ones).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundStats {
    pub samples: u64,
    pub sum_violations: u64,
    pub square_violations: u64,
    pub potential_violations: u64,
    pub worst_ratio: f64,
}

impl BoundStats {
    pub fn violations(&self) -> u64 {
        self.sum_violations + self.square_violations + self.potential_violations
    }
}

/// Checks the momentum-weight bounds and the potential inequality over
/// `k = 0..=k_max`.
///
/// For the double-extrapolation schedule: `Σθ ∈ (1/c, 1.5/c)`, `θ_1² ≤ 4/c²`,
/// `θ_2² ≤ 1/(4c²)` with `c = (k+3)^(3/5)`. For the general schedule:
/// `Σθ ∈ [1/(2c), ln(2p−1)/c]` and `θ_t² ≤ 16((p−1)!)²/(t²c²)` with
/// `c = (k+p)^(2p/(3p+1))`.
pub fn bound_sweep_stats(config: &ScheduleConfig, k_max: u64) -> Result<BoundStats> {
    config.validate()?;
    let p = config.p;
    if !(2..=6).contains(&p) || config.mode == ScheduleMode::Custom {
        return Err(Error::invalid("p", "bound sweeps cover the built-in schedules with 2 <= p <= 6"));
    }
    let special = config.mode == ScheduleMode::P3Special;
    let fact = factorial(p - 1);
    let log_bound = ((2 * p - 1) as f64).ln();
    let mut s = BoundStats::default();
    for k in 0..=k_max {
        let params = config.params(k)?;
        // c from the largest extrapolation parameter, γ_1 = 1/c.
        let c = 1.0 / params.gammas[0];
        let sum = params.theta_sum;
        let (lo, hi, strict) = if special {
            (1.0 / c, 1.5 / c, true)
        } else {
            (1.0 / (2.0 * c), log_bound / c, false)
        };
        let sum_ok = if strict { lo < sum && sum < hi } else { lo <= sum && sum <= hi };
        s.sum_violations += u64::from(!sum_ok);
        s.worst_ratio = s.worst_ratio.max(lo / sum).max(sum / hi);

        for (t, th) in params.thetas.iter().enumerate() {
            let tt = (t + 1) as f64;
            let bound = if special {
                [4.0, 0.25][t] / (c * c)
            } else {
                16.0 * fact * fact / (tt * tt * c * c)
            };
            let sq = th * th;
            s.square_violations += u64::from(sq > bound);
            s.worst_ratio = s.worst_ratio.max(sq / bound);
        }

        s.potential_violations += u64::from(!check_potential_inequality(k, config)?);
        s.samples += 1;
    }
    Ok(s)
}

pub fn bound_sweep(config: &ScheduleConfig, k_max: u64) -> Result<CheckReport> {
    let s = bound_sweep_stats(config, k_max)?;
    let label = match config.mode {
        ScheduleMode::P3Special => "p3-special".to_string(),
        _ => format!("p{}", config.p),
    };
    Ok(CheckReport::new(
        format!("bounds:{label}"),
        s.violations() == 0,
        s.worst_ratio,
        s.samples,
        format!(
            "violations: sum {}, squares {}, potential {}; worst lhs/rhs {:.6}",
            s.sum_violations, s.square_violations, s.potential_violations, s.worst_ratio
        ),
    ))
}

/// Same sweep as [`schedule_cross_check`] on externally supplied weights,
/// used for fault injection: `thetas_for(k)` replaces the schedule's weights.
pub fn weights_check_with<F>(p: u32, k_max: u64, thetas_for: F) -> Result<CheckReport>
where
    F: Fn(u64, &[f64]) -> Vec<f64>,
{
    let config = ScheduleConfig::general(p)?;
    let mut worst: f64 = 0.0;
    let mut sign_violations = 0u64;
    for k in 0..=k_max {
        let params = config.params(k)?;
        let thetas = thetas_for(k, &params.thetas);
        worst = worst.max(relative_residual(&params.gammas, &thetas));
        sign_violations += u64::from(
            !thetas
                .iter()
                .enumerate()
                .all(|(t, th)| if t % 2 == 0 { *th > 0.0 } else { *th < 0.0 }),
        );
    }
    Ok(CheckReport::new(
        format!("weights:p{p}"),
        worst <= RESIDUAL_TOLERANCE && sign_violations == 0,
        worst,
        k_max + 1,
        format!("residual tolerance {RESIDUAL_TOLERANCE:e}; sign violations {sign_violations}"),
    ))
}
