//! Single runs, seeded comparisons at equal oracle budgets, and the step-size
//! grid search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::optimizer::{run, AlgorithmKind, RunOptions, Trajectory};
use crate::schedule::{iteration_threshold, theorem_constant, ScheduleMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub p: u32,
    pub m: f64,
    pub epsilon: f64,
    pub iteration_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: RunConfig,
    pub trajectory: Trajectory,
    pub theory: Option<TheoryReport>,
}

fn theory_report(config: &RunConfig) -> Result<Option<TheoryReport>> {
    let (Some(spec), AlgorithmKind::Mem { schedule }) = (&config.theory, &config.algorithm) else {
        return Ok(None);
    };
    if schedule.mode == ScheduleMode::Custom {
        return Ok(None);
    }
    let m = theorem_constant(schedule.p, &spec.constants)?;
    Ok(Some(TheoryReport {
        p: schedule.p,
        m,
        epsilon: spec.epsilon,
        iteration_threshold: iteration_threshold(schedule.p, m, spec.epsilon)?,
    }))
}

/// Builds the problem and initial point from `config` and runs it.
pub fn run_experiment(config: &RunConfig) -> Result<Experiment> {
    config.validate()?;
    let problem = config.problem.build(config.seed)?;
    let x0 = config.x0.resolve(problem.dim())?;
    let options = RunOptions::new(config.budget, config.seed).with_stride(config.log_stride);
    let trajectory = run(&config.algorithm, problem.as_ref(), config.noise, &x0, &options)?;
    log::info!(
        "{} on {}: {} iterations, {} oracle calls, final rel_obj {:e}",
        trajectory.summary.algorithm,
        config.problem.name(),
        trajectory.summary.iterations,
        trajectory.summary.oracle_calls,
        trajectory.summary.final_rel_obj
    );
    Ok(Experiment {
        theory: theory_report(config)?,
        config: config.clone(),
        trajectory,
    })
}

/// Median of a nonempty slice; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub median_final_rel_obj: f64,
    /// Final relative objective per seed, in seed order.
    pub final_rel_obj: Vec<f64>,
    pub oracle_calls: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSeries {
    pub label: String,
    pub median_rel_obj: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
    /// Common oracle-call grid for `series`.
    pub grid: Vec<u64>,
    pub series: Vec<ComparisonSeries>,
}

impl Comparison {
    /// Plain-text table of median final values.
    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(9);
        let mut out = format!("{:width$}  median final rel_obj  ({} seeds)\n", "algorithm", self.seeds.len());
        for r in &self.rows {
            out.push_str(&format!("{:width$}  {:.6e}\n", r.label, r.median_final_rel_obj));
        }
        out
    }
}

/// `rel_obj` of the latest iterate reached within `calls` evaluations.
fn value_at(trajectory: &Trajectory, calls: u64) -> f64 {
    let mut value = trajectory.records[0].rel_obj;
    for r in &trajectory.records {
        if r.oracle_calls > calls {
            break;
        }
        value = r.rel_obj;
    }
    value
}

fn check_comparable(configs: &[RunConfig]) -> Result<()> {
    let first = configs
        .first()
        .ok_or_else(|| Error::invalid("configs", "a comparison needs at least one run"))?;
    for c in &configs[1..] {
        if c.problem != first.problem {
            return Err(Error::MismatchedProblems(format!(
                "{} vs {}",
                first.problem.name(),
                c.problem.name()
            )));
        }
        if c.noise != first.noise {
            return Err(Error::MismatchedProblems("noise models differ".into()));
        }
        if c.budget != first.budget || c.x0 != first.x0 {
            return Err(Error::MismatchedProblems("budgets or initial points differ".into()));
        }
    }
    Ok(())
}

/// Runs every config once per seed (the seed replaces the config's own) and
/// reports medians. Series are sampled on `grid_points + 1` evenly spaced
/// oracle-call counts up to the smallest total any run reached.
pub fn compare(configs: &[RunConfig], seeds: &[u64], grid_points: usize) -> Result<Comparison> {
    check_comparable(configs)?;
    if seeds.is_empty() {
        return Err(Error::invalid("seeds", "at least one seed is required"));
    }
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let mut c = configs[i].clone();
            c.seed = seed;
            c.output = None;
            run_experiment(&c).map(|e| e.trajectory)
        })
        .collect::<Result<Vec<_>>>()?;
    let horizon = results.iter().map(|t| t.summary.oracle_calls).min().unwrap_or(0);
    let points = grid_points.max(1) as u64;
    let grid: Vec<u64> = (0..=points).map(|j| horizon * j / points).collect();

    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (i, chunk) in results.chunks(seeds.len()).enumerate() {
        let label = configs[i].algorithm.label();
        let finals: Vec<f64> = chunk.iter().map(|t| t.summary.final_rel_obj).collect();
        rows.push(ComparisonRow {
            label: label.clone(),
            median_final_rel_obj: median(&finals),
            final_rel_obj: finals,
            oracle_calls: chunk.iter().map(|t| t.summary.oracle_calls).collect(),
        });
        let median_rel_obj = grid
            .iter()
            .map(|&c| median(&chunk.iter().map(|t| value_at(t, c)).collect::<Vec<_>>()))
            .collect();
        series.push(ComparisonSeries { label, median_rel_obj });
    }
    Ok(Comparison {
        seeds: seeds.to_vec(),
        rows,
        grid,
        series,
    })
}

/// Multiplies every step size of `kind` by `factor`.
pub fn scale_step(kind: &AlgorithmKind, factor: f64) -> AlgorithmKind {
    let mut k = kind.clone();
    match &mut k {
        AlgorithmKind::Mem { schedule } => schedule.eta_scale *= factor,
        AlgorithmKind::Sg { eta } | AlgorithmKind::SgPm { eta, .. } | AlgorithmKind::Nigt { eta, .. } => {
            eta.scale *= factor;
            eta.cap = eta.cap.map(|c| c * factor);
        }
    }
    k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub label: String,
    pub scales: Vec<f64>,
    pub median_final_rel_obj: Vec<f64>,
    pub best_scale: f64,
}

/// Log-grid search over a multiplier on the step size. The result is only
/// reported; nothing is applied to `config`.
pub fn grid_search(config: &RunConfig, scales: &[f64], seeds: &[u64]) -> Result<GridSearchResult> {
    if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::invalid("scales", "need at least one positive step multiplier"));
    }
    let configs: Vec<RunConfig> = scales
        .iter()
        .map(|&s| RunConfig {
            algorithm: scale_step(&config.algorithm, s),
            ..config.clone()
        })
        .collect();
    let cmp = compare(&configs, seeds, 1)?;
    let medians: Vec<f64> = cmp.rows.iter().map(|r| r.median_final_rel_obj).collect();
    let best = medians
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| scales[i])
        .unwrap_or(scales[0]);
    Ok(GridSearchResult {
        label: config.algorithm.label(),
        scales: scales.to_vec(),
        median_final_rel_obj: medians,
        best_scale: best,
    })
}

/// `lo · ratio^j` for `j = 0..count`.
pub fn log_grid(lo: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| lo * ratio.powi(j as i32)).collect()
}
