//! Resolved experiment configuration and the problem builder.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{AlgorithmKind, Budget};
use crate::problems::{
    datafit_problem, generate_synthetic, load_csv_dataset, quadratic_problem, robust_problem, Dataset, NoiseModel,
    SmoothProblem, TargetColumn,
};
use crate::schedule::ProblemConstants;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DataSource {
    /// Square synthetic instance; `seed` defaults to the run seed.
    Synthetic { n: usize, seed: Option<u64> },
    File { path: PathBuf, target: TargetColumn },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSpec {
    Datafit { source: DataSource },
    Robust { source: DataSource },
    Quadratic { dim: usize, conditioning: f64 },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Datafit { .. } => "datafit",
            ProblemSpec::Robust { .. } => "robust",
            ProblemSpec::Quadratic { .. } => "quadratic",
        }
    }

    fn dataset(source: &DataSource, run_seed: u64) -> Result<Dataset> {
        match source {
            DataSource::Synthetic { n, seed } => generate_synthetic(*n, seed.unwrap_or(run_seed)),
            DataSource::File { path, target } => load_csv_dataset(path, target),
        }
    }

    /// Builds the problem; synthetic data without an explicit seed uses `run_seed`.
    pub fn build(&self, run_seed: u64) -> Result<Box<dyn SmoothProblem>> {
        Ok(match self {
            ProblemSpec::Datafit { source } => Box::new(datafit_problem(Self::dataset(source, run_seed)?)?),
            ProblemSpec::Robust { source } => Box::new(robust_problem(Self::dataset(source, run_seed)?)?),
            ProblemSpec::Quadratic { dim, conditioning } => Box::new(quadratic_problem(*dim, *conditioning)?),
        })
    }
}

/// `ones`, `zeros`, or an explicit comma-separated vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialPoint {
    #[default]
    Ones,
    Zeros,
    Explicit(Vec<f64>),
}

impl InitialPoint {
    pub fn resolve(&self, dim: usize) -> Result<Vec<f64>> {
        match self {
            InitialPoint::Ones => Ok(vec![1.0; dim]),
            InitialPoint::Zeros => Ok(vec![0.0; dim]),
            InitialPoint::Explicit(v) if v.len() == dim => Ok(v.clone()),
            InitialPoint::Explicit(v) => Err(Error::invalid(
                "x0",
                format!("has {} entries but the problem dimension is {dim}", v.len()),
            )),
        }
    }
}

impl FromStr for InitialPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ones" => Ok(InitialPoint::Ones),
            "zeros" => Ok(InitialPoint::Zeros),
            list => list
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(InitialPoint::Explicit)
                .map_err(|_| Error::invalid("x0", format!("expected ones, zeros, or a comma-separated list, got {s:?}"))),
        }
    }
}

impl TryFrom<String> for InitialPoint {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for InitialPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialPoint::Ones => f.write_str("ones"),
            InitialPoint::Zeros => f.write_str("zeros"),
            InitialPoint::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl From<InitialPoint> for String {
    fn from(p: InitialPoint) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid("format", format!("expected csv or json, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: OutputFormat,
}

/// Constants for reporting the rate-bound constant and iteration threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheorySpec {
    pub constants: ProblemConstants,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub problem: ProblemSpec,
    pub noise: NoiseModel,
    pub budget: Budget,
    pub seed: u64,
    pub x0: InitialPoint,
    pub log_stride: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheorySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.algorithm.validate()?;
        self.noise.validate()?;
        self.budget.validate()?;
        if self.log_stride == 0 {
            return Err(Error::invalid("log-stride", "must be at least 1"));
        }
        match &self.problem {
            ProblemSpec::Datafit { source } | ProblemSpec::Robust { source } => {
                if let DataSource::Synthetic { n, .. } = source {
                    if *n == 0 {
                        return Err(Error::invalid("synthetic", "dimension must be at least 1"));
                    }
                }
            }
            ProblemSpec::Quadratic { dim, conditioning } => {
                if *dim == 0 {
                    return Err(Error::invalid("dim", "must be at least 1"));
                }
                if !(*conditioning >= 1.0 && conditioning.is_finite()) {
                    return Err(Error::invalid("conditioning", "must be finite and >= 1"));
                }
            }
        }
        if let Some(t) = &self.theory {
            if !(t.epsilon > 0.0 && t.epsilon < 1.0) {
                return Err(Error::invalid("epsilon", "must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}
