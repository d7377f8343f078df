//! Runs the verification suite and aggregates the reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problems::{datafit_problem, generate_synthetic, quadratic_problem, robust_problem, NoiseModel, SmoothProblem};
use crate::schedule::ScheduleConfig;
use crate::verify::{
    bound_sweep, gradient_check, noise_moment_check, noise_unbiasedness_check, schedule_cross_check,
    smoothness_divergence_check, taylor_envelope, taylor_remainder_check, weights_check_with, CheckReport,
};

/// Deliberate corruption used to confirm the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Negate the first momentum weight.
    ThetaSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySweep {
    pub seed: u64,
    pub cross_k_max: u64,
    pub bound_k_max: u64,
    pub gradient_points: usize,
    pub taylor_pairs: usize,
    pub noise_draws: usize,
    pub dim: usize,
    pub sigma_tilde: f64,
    #[serde(default)]
    pub fault: Option<Fault>,
}

impl Default for VerifySweep {
    fn default() -> Self {
        Self {
            seed: 0,
            cross_k_max: 10_000,
            bound_k_max: 1_000_000,
            gradient_points: 20,
            taylor_pairs: 100,
            noise_draws: 100_000,
            dim: 20,
            sigma_tilde: 10.0,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub sweep: VerifySweep,
    pub checks: Vec<CheckReport>,
}

type Check = Box<dyn Fn() -> Result<Vec<CheckReport>> + Send + Sync>;

fn checks(sweep: &VerifySweep) -> Vec<Check> {
    let s = sweep.clone();
    let mut out: Vec<Check> = Vec::new();

    let k = s.cross_k_max;
    out.push(Box::new(move || (2..=6).map(|p| schedule_cross_check(p, k)).collect()));

    let fault = s.fault;
    out.push(Box::new(move || {
        let report = weights_check_with(3, k, |_, th| {
            let mut v = th.to_vec();
            if fault == Some(Fault::ThetaSign) {
                v[0] = -v[0];
            }
            v
        })?;
        Ok(vec![report])
    }));

    let kb = s.bound_k_max;
    for p in 2..=6 {
        out.push(Box::new(move || Ok(vec![bound_sweep(&ScheduleConfig::general(p)?, kb)?])));
    }
    out.push(Box::new(move || Ok(vec![bound_sweep(&ScheduleConfig::p3(), kb)?])));

    let (n, seed, points, pairs) = (s.dim, s.seed, s.gradient_points, s.taylor_pairs);
    out.push(Box::new(move || {
        let data = generate_synthetic(n, seed)?;
        let problems: Vec<Box<dyn SmoothProblem>> = vec![
            Box::new(datafit_problem(data.clone())?),
            Box::new(robust_problem(data)?),
            Box::new(quadratic_problem(n, 100.0)?),
        ];
        problems.iter().map(|p| gradient_check(p.as_ref(), points, seed)).collect()
    }));

    out.push(Box::new(move || {
        let q = quadratic_problem(n, 100.0)?;
        let mut top = vec![0.0; n];
        top[n - 1] = 1.0;
        let origin = vec![0.0; n];
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.91).cos()).collect();
        let datafit = datafit_problem(generate_synthetic(n, seed)?)?;
        Ok(vec![
            taylor_remainder_check(&q, &origin, &top, 1)?,
            taylor_remainder_check(&q, &x, &y, 2)?,
            taylor_envelope(&datafit, 2, pairs, 1.0, seed)?,
        ])
    }));

    let (draws, sigma) = (s.noise_draws, s.sigma_tilde);
    out.push(Box::new(move || {
        let noise = NoiseModel::scalar(sigma);
        let datafit = datafit_problem(generate_synthetic(n, seed)?)?;
        let q = quadratic_problem(n, 100.0)?;
        let origin = vec![0.0; n];
        let unit = vec![1.0 / (n as f64).sqrt(); n];
        Ok(vec![
            noise_unbiasedness_check(&datafit, &noise, &vec![1.0; n], draws, seed)?,
            noise_moment_check(&q, &noise, &origin, &unit, draws, seed)?,
            smoothness_divergence_check(&q, &noise, &origin, &[1e-2, 1e-3, 1e-4])?,
        ])
    }));
    out
}

/// Runs every check (in parallel) and reports whether all passed.
pub fn verify_all(sweep: &VerifySweep) -> Result<VerificationReport> {
    let groups = checks(sweep)
        .par_iter()
        .map(|c| c())
        .collect::<Result<Vec<_>>>()?;
    let checks: Vec<CheckReport> = groups.into_iter().flatten().collect();
    for c in checks.iter().filter(|c| !c.passed) {
        log::warn!("check {} failed: {}", c.name, c.detail);
    }
    Ok(VerificationReport {
        passed: checks.iter().all(|c| c.passed),
        sweep: sweep.clone(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifySweep {
        VerifySweep {
            cross_k_max: 100,
            bound_k_max: 1000,
            gradient_points: 3,
            taylor_pairs: 5,
            noise_draws: 20_000,
            dim: 6,
            ..VerifySweep::default()
        }
    }

    #[test]
    fn small_sweep_passes_and_is_reproducible() {
        let a = verify_all(&small()).unwrap();
        assert!(a.passed, "{:#?}", a.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        let b = verify_all(&small()).unwrap();
        for (x, y) in a.checks.iter().zip(&b.checks) {
            assert_eq!(x.worst_case.to_bits(), y.worst_case.to_bits(), "{}", x.name);
        }
    }

    #[test]
    fn injected_fault_fails() {
        let r = verify_all(&VerifySweep {
            fault: Some(Fault::ThetaSign),
            ..small()
        })
        .unwrap();
        assert!(!r.passed);
        assert!(r.checks.iter().any(|c| c.name == "weights:p3" && !c.passed));
    }
}
