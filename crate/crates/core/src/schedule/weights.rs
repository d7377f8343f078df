//! Momentum weights from extrapolation parameters.
//!
//! Given distinct extrapolation parameters `γ_1 > … > γ_q` in `(0, 1)`, the
//! weights `θ` solve the Vandermonde-type system
//!
//! ```text
//!   Σ_t θ_t / γ_t^r = 1,   r = 1..q
//! ```
//!
//! [`solve_weights_closed_form`] evaluates the explicit product solution and is
//! the production path. [`solve_weights_linear`] factorizes the dense matrix
//! instead and is kept as an independent reference.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest system the dense reference solver accepts.
pub const MAX_DENSE_ORDER: usize = 8;

/// Condition-number ceiling (1-norm, after equilibration) for the dense solve.
pub const MAX_CONDITION: f64 = 1e12;

fn check_gammas(gammas: &[f64]) -> Result<()> {
    if gammas.is_empty() {
        return Err(Error::invalid("gammas", "at least one extrapolation parameter is required"));
    }
    for (t, &g) in gammas.iter().enumerate() {
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::invalid(
                "gammas",
                format!("gamma[{}] = {g} is outside (0, 1)", t + 1),
            ));
        }
    }
    for (t, w) in gammas.windows(2).enumerate() {
        if w[1] >= w[0] {
            return Err(Error::invalid(
                "gammas",
                format!(
                    "gammas must be strictly decreasing (gamma[{}] = {} <= gamma[{}] = {})",
                    t + 1,
                    w[0],
                    t + 2,
                    w[1]
                ),
            ));
        }
    }
    Ok(())
}

/// Explicit solution of the weight system:
///
/// ```text
///   θ_t = γ_t · Π_{s≠t} (1 − 1/γ_s) / (1/γ_t − 1/γ_s)
/// ```
///
/// Written as a product of ratios so intermediate values stay bounded for
/// large `1/γ`. With a single parameter the product is empty and `θ = γ`
/// exactly.
pub fn solve_weights_closed_form(gammas: &[f64]) -> Result<Vec<f64>> {
    check_gammas(gammas)?;
    Ok(closed_form_unchecked(gammas))
}

pub(crate) fn closed_form_unchecked(gammas: &[f64]) -> Vec<f64> {
    let inv: Vec<f64> = gammas.iter().map(|g| 1.0 / g).collect();
    (0..gammas.len())
        .map(|t| {
            let ratio: f64 = (0..gammas.len())
                .filter(|&s| s != t)
                .map(|s| (1.0 - inv[s]) / (inv[t] - inv[s]))
                .product();
            gammas[t] * ratio
        })
        .collect()
}

/// `Σ θ_t = 1 − Π(1/γ_t − 1) / Π(1/γ_t) = 1 − Π(1 − γ_t)`, evaluated as
/// `−expm1(Σ ln(1 − γ_t))` to keep relative accuracy when every `γ_t` is small.
pub fn weight_sum_closed_form(gammas: &[f64]) -> Result<f64> {
    check_gammas(gammas)?;
    let log_prod: f64 = gammas.iter().map(|g| (-g).ln_1p()).sum();
    Ok(-log_prod.exp_m1())
}

/// Dense reference solve of the weight system.
///
/// Builds the matrix with entries `1/γ_t^r`, equilibrates rows and then
/// columns to unit max-norm, and factorizes with partially pivoted LU. The
/// 1-norm condition number of the equilibrated matrix is computed from its
/// explicit inverse (cheap at `q ≤ 8`) and must not exceed [`MAX_CONDITION`].
pub fn solve_weights_linear(gammas: &[f64]) -> Result<Vec<f64>> {
    check_gammas(gammas)?;
    let q = gammas.len();
    if q > MAX_DENSE_ORDER {
        return Err(Error::invalid(
            "gammas",
            format!("dense solve supports at most {MAX_DENSE_ORDER} parameters, got {q}"),
        ));
    }

    let a = weight_matrix(gammas);
    let row_scale: Vec<f64> = (0..q)
        .map(|r| 1.0 / (0..q).map(|t| a[(r, t)].abs()).fold(0.0, f64::max))
        .collect();
    let col_scale: Vec<f64> = (0..q)
        .map(|t| 1.0 / (0..q).map(|r| (row_scale[r] * a[(r, t)]).abs()).fold(0.0, f64::max))
        .collect();
    let scaled = DMatrix::from_fn(q, q, |r, t| row_scale[r] * a[(r, t)] * col_scale[t]);
    let rhs = DVector::from_iterator(q, row_scale.iter().copied());

    let lu = scaled.clone().lu();
    let inverse = lu.try_inverse().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    let condition = one_norm(&scaled) * one_norm(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }

    let y = scaled
        .lu()
        .solve(&rhs)
        .ok_or(Error::IllConditioned { condition })?;
    Ok((0..q).map(|t| col_scale[t] * y[t]).collect())
}

/// The `q × q` matrix with entry `(r, t) = 1/γ_t^(r+1)`.
pub fn weight_matrix(gammas: &[f64]) -> DMatrix<f64> {
    let q = gammas.len();
    DMatrix::from_fn(q, q, |r, t| (1.0 / gammas[t]).powi(r as i32 + 1))
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest row-relative residual of the weight system,
/// `max_r |Σ_t θ_t/γ_t^r − 1| / Σ_t |θ_t/γ_t^r|`.
///
/// The denominator measures the size of the terms being summed, so the value
/// stays near machine precision even when the individual terms are large and
/// nearly cancel.
pub fn relative_residual(gammas: &[f64], thetas: &[f64]) -> f64 {
    let q = gammas.len().min(thetas.len());
    let mut worst: f64 = 0.0;
    for r in 1..=q as i32 {
        let mut sum = 0.0;
        let mut scale = 0.0;
        for t in 0..q {
            let term = thetas[t] * (1.0 / gammas[t]).powi(r);
            sum += term;
            scale += term.abs();
        }
        let res = if scale > 0.0 {
            (sum - 1.0).abs() / scale.max(1.0)
        } else {
            1.0
        };
        worst = worst.max(res);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn single_parameter_gives_theta_equal_gamma() {
        for g in [0.01, 0.3, 0.5, 0.999] {
            assert_eq!(solve_weights_closed_form(&[g]).unwrap(), vec![g]);
            assert!(close(weight_sum_closed_form(&[g]).unwrap(), g, 1e-15));
        }
        assert!(close(solve_weights_linear(&[0.5]).unwrap()[0], 0.5, 1e-15));
    }

    #[test]
    fn double_extrapolation_weights() {
        // Rounded p = 3 parameters at k = 0; reference from a 40-digit dense solve.
        let gammas = [0.517281, 0.258640];
        let expected = [0.7669814016, -0.1248499594];
        let cf = solve_weights_closed_form(&gammas).unwrap();
        let dense = solve_weights_linear(&gammas).unwrap();
        for t in 0..2 {
            assert!(close(cf[t], expected[t], 1e-9), "{cf:?}");
            assert!(close(dense[t], expected[t], 1e-9), "{dense:?}");
        }
        let sum = weight_sum_closed_form(&gammas).unwrap();
        assert!(close(sum, cf[0] + cf[1], 1e-12));
        assert!((sum - 0.642132).abs() < 1e-5);
    }

    #[test]
    fn dense_and_closed_form_agree_on_generic_gammas() {
        // 40-digit reference: (1.134, -0.168, 0.006), sum 0.972.
        let gammas = [0.9, 0.6, 0.3];
        let cf = solve_weights_closed_form(&gammas).unwrap();
        let dense = solve_weights_linear(&gammas).unwrap();
        for (t, want) in [1.134, -0.168, 0.006].into_iter().enumerate() {
            assert!(close(cf[t], want, 1e-12));
            assert!(close(dense[t], cf[t], 1e-8));
        }
        assert!(close(weight_sum_closed_form(&gammas).unwrap(), 0.972, 1e-12));
    }

    #[test]
    fn dense_residual_is_small_relative_to_system_norm() {
        let gammas = [0.9, 0.6, 0.3];
        let theta = solve_weights_linear(&gammas).unwrap();
        let a = weight_matrix(&gammas);
        let th = DVector::from_vec(theta.clone());
        let r = &a * &th - DVector::from_element(3, 1.0);
        let a_inf = a.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let th_inf = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(r.amax() <= 1e-9 * a_inf * th_inf);
    }

    #[test]
    fn sign_alternation() {
        let theta = solve_weights_closed_form(&[0.8, 0.5, 0.3, 0.2, 0.1]).unwrap();
        for (t, th) in theta.iter().enumerate() {
            if t % 2 == 0 {
                assert!(*th > 0.0);
            } else {
                assert!(*th < 0.0);
            }
        }
    }

    #[test]
    fn rejects_invalid_gammas() {
        assert!(solve_weights_closed_form(&[]).is_err());
        assert!(solve_weights_closed_form(&[0.5, 0.5]).is_err());
        assert!(solve_weights_closed_form(&[0.3, 0.5]).is_err());
        assert!(solve_weights_closed_form(&[0.0]).is_err());
        assert!(solve_weights_closed_form(&[-0.2]).is_err());
        assert!(solve_weights_closed_form(&[1.0]).is_err());
        assert!(weight_sum_closed_form(&[0.4, 0.4]).is_err());
        assert!(solve_weights_linear(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn dense_solver_caps_order() {
        let gammas: Vec<f64> = (1..=9).map(|t| 0.9 / t as f64).collect();
        assert!(matches!(
            solve_weights_linear(&gammas),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn dense_solver_flags_near_duplicate_gammas() {
        let gammas = [0.5, 0.5 - 1e-9, 0.5 - 2e-9];
        assert!(matches!(
            solve_weights_linear(&gammas),
            Err(Error::IllConditioned { .. })
        ));
    }
}
