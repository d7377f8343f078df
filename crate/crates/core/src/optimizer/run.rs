use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{step, AlgorithmKind, NoisyOracle, OptimizerState};
use crate::error::{check_dim, Error, Result};
use crate::problems::{NoiseModel, SmoothProblem};
use crate::vector::{dist, norm};

/// Stopping rule. The run ends as soon as any configured limit is reached;
/// at least one of `iterations` and `oracle_calls` must be set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Budget {
    #[serde(default)]
    pub iterations: Option<u64>,
    #[serde(default)]
    pub oracle_calls: Option<u64>,
    #[serde(default)]
    pub wall_seconds: Option<f64>,
}

impl Budget {
    pub fn iterations(n: u64) -> Self {
        Self {
            iterations: Some(n),
            ..Self::default()
        }
    }

    pub fn oracle_calls(n: u64) -> Self {
        Self {
            oracle_calls: Some(n),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations.is_none() && self.oracle_calls.is_none() && self.wall_seconds.is_none() {
            return Err(Error::invalid("budget", "set an iteration, oracle-call, or wall-time limit"));
        }
        if let Some(w) = self.wall_seconds {
            if !(w > 0.0) {
                return Err(Error::invalid("wall_seconds", format!("must be positive, got {w}")));
            }
        }
        Ok(())
    }

    fn exhausted(&self, state: &OptimizerState, started: &Instant) -> bool {
        self.iterations.is_some_and(|n| state.k >= n)
            || self.oracle_calls.is_some_and(|n| state.oracle_calls >= n)
            || self.wall_seconds.is_some_and(|w| started.elapsed().as_secs_f64() >= w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub budget: Budget,
    pub seed: u64,
    /// Exact metrics are computed every `log_stride` iterations and at the end.
    pub log_stride: u64,
    /// Keep every iterate, needed for random output-iterate selection.
    #[serde(default)]
    pub store_iterates: bool,
}

impl RunOptions {
    pub fn new(budget: Budget, seed: u64) -> Self {
        Self {
            budget,
            seed,
            log_stride: 1,
            store_iterates: false,
        }
    }

    pub fn with_stride(mut self, stride: u64) -> Self {
        self.log_stride = stride;
        self
    }

    pub fn storing_iterates(mut self) -> Self {
        self.store_iterates = true;
        self
    }
}

/// One logged iterate. `oracle_calls` counts the evaluations spent to reach
/// `x^k`. `mom_err = ‖m^k − ∇f(x^k)‖` is absent on the final record because no
/// momentum is formed at the last iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub k: u64,
    pub f_val: f64,
    pub rel_obj: f64,
    pub grad_norm: f64,
    pub mom_err: Option<f64>,
    pub oracle_calls: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub iterations: u64,
    pub oracle_calls: u64,
    pub zero_direction_events: u64,
    pub f0: f64,
    pub final_f: f64,
    pub final_rel_obj: f64,
    pub min_grad_norm: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub summary: RunSummary,
    pub final_x: Vec<f64>,
    /// `x^0, …, x^K` when iterates are stored, otherwise empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterates: Vec<Vec<f64>>,
}

fn record(
    problem: &dyn SmoothProblem,
    k: u64,
    x: &[f64],
    m: Option<&[f64]>,
    f0: f64,
    oracle_calls: u64,
    started: &Instant,
) -> Result<TrajectoryRecord> {
    let f_val = problem.value(x)?;
    let grad = problem.gradient(x)?;
    Ok(TrajectoryRecord {
        k,
        f_val,
        rel_obj: f_val / f0,
        grad_norm: norm(&grad),
        mom_err: m.map(|m| dist(m, &grad)),
        oracle_calls,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Runs `kind` from `x0` until the budget is spent.
///
/// Iteration `k` draws its sample from `(seed, k)` alone, so two runs with the
/// same inputs produce identical trajectories apart from wall-clock fields.
pub fn run(
    kind: &AlgorithmKind,
    problem: &dyn SmoothProblem,
    noise: NoiseModel,
    x0: &[f64],
    options: &RunOptions,
) -> Result<Trajectory> {
    kind.validate()?;
    noise.validate()?;
    options.budget.validate()?;
    check_dim(problem.dim(), x0.len())?;
    if options.log_stride == 0 {
        return Err(Error::invalid("log_stride", "must be at least 1"));
    }
    let n = problem.dim();
    let oracle = NoisyOracle::new(problem, noise);
    let started = Instant::now();
    let f0 = problem.value(x0)?;
    let mut state = OptimizerState::new(x0.to_vec(), kind.evaluations_per_iteration());
    let mut records = Vec::new();
    let mut iterates = Vec::new();

    while !options.budget.exhausted(&state, &started) {
        let sample = noise.sample(options.seed, state.k, n);
        let next = step(kind, &state, &oracle, &sample)?;
        if options.store_iterates {
            iterates.push(state.x_cur.clone());
        }
        if state.k.is_multiple_of(options.log_stride) {
            records.push(record(problem, state.k, &state.x_cur, Some(&next.m), f0, state.oracle_calls, &started)?);
        }
        state = next;
    }

    if options.store_iterates {
        iterates.push(state.x_cur.clone());
    }
    let last = record(problem, state.k, &state.x_cur, None, f0, state.oracle_calls, &started)?;
    let final_f = last.f_val;
    let final_rel_obj = last.rel_obj;
    records.push(last);
    let min_grad_norm = records.iter().map(|r| r.grad_norm).fold(f64::INFINITY, f64::min);
    if state.zero_direction_events > 0 {
        log::warn!("{} zero-direction events in {} iterations", state.zero_direction_events, state.k);
    }

    Ok(Trajectory {
        summary: RunSummary {
            algorithm: kind.label(),
            iterations: state.k,
            oracle_calls: state.oracle_calls,
            zero_direction_events: state.zero_direction_events,
            f0,
            final_f,
            final_rel_obj,
            min_grad_norm,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        },
        records,
        final_x: state.x_cur,
        iterates,
    })
}

/// Returns `x^ι` with `ι` uniform on `{0, …, K−1}`.
pub fn select_output_iterate<'a, R: Rng + ?Sized>(trajectory: &'a Trajectory, rng: &mut R) -> Result<&'a [f64]> {
    let k = trajectory.summary.iterations as usize;
    if k == 0 || trajectory.iterates.len() < k {
        return Err(Error::EmptyTrajectory);
    }
    Ok(&trajectory.iterates[rng.random_range(0..k)])
}
