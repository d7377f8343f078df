//! Command-line front end: `run`, `compare`, `verify`, `gen-data`.
//!
//! Run settings come from an optional TOML file whose keys are the long flag
//! names (`alg = "mem"`, `p = 3`, `sigma = 10.0`, ...); flags given on the
//! command line override the file.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::config::{DataSource, InitialPoint, OutputFormat, OutputSpec, ProblemSpec, RunConfig, TheorySpec};
use super::emit::{emit, json_report, write_csv, write_json};
use super::experiment::{compare, grid_search, run_experiment, Comparison, GridSearchResult};
use super::verify_all::{verify_all, Fault, VerifySweep};
use crate::error::{Error, Result};
use crate::optimizer::{AlgorithmKind, Budget};
use crate::problems::{generate_synthetic_rows, write_csv_dataset, NoiseModel};
use crate::schedule::{CustomRule, DecayRule, ProblemConstants, ScheduleConfig};

/// Iteration budget used when no limit is given.
pub const DEFAULT_ITERATIONS: u64 = 1000;

#[derive(Debug, Parser)]
#[command(name = "xmom", version, about = "Multi-extrapolated momentum experiments")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm on one problem.
    Run(RunArgs),
    /// Run several algorithms over a list of seeds at an equal budget.
    Compare(CompareArgs),
    /// Run the verification suite; exits nonzero if any check fails.
    Verify(VerifyArgs),
    /// Write a synthetic data-fitting dataset as CSV.
    GenData(GenDataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgName {
    Mem,
    Sg,
    Sgpm,
    Nigt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleName {
    General,
    P3,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemName {
    Datafit,
    Robust,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseName {
    None,
    Scalar,
    Elementwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatName {
    Csv,
    Json,
}

/// Settings shared by the config file and the flags. Every field is optional
/// here; defaults are applied in [`resolve`].
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Algorithm [default: mem].
    #[arg(long, value_enum)]
    pub alg: Option<AlgName>,
    /// Smoothness order of the MEM schedule (q = p - 1).
    #[arg(long)]
    pub p: Option<u32>,
    /// Number of extrapolations; must equal p - 1 for the built-in schedules.
    #[arg(long)]
    pub q: Option<usize>,
    /// MEM schedule [default: p3 when p = 3, otherwise general].
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleName>,
    /// Custom schedule: extrapolation coefficients, strictly decreasing in (0, 1).
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
    /// NIGT: fixed gamma [default: 0.1]. SG-PM: scale of the gamma rule [default: 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Decay exponent of the SG-PM or custom gamma rule [SG-PM default: 0.5; custom: 0].
    #[arg(long)]
    pub gamma_power: Option<f64>,
    /// Index offset of the gamma rule [default: 1].
    #[arg(long)]
    pub gamma_offset: Option<f64>,
    /// Step-size multiplier [default: 1; SG: 0.1].
    #[arg(long)]
    pub eta_scale: Option<f64>,
    /// Decay exponent of the step rule [SG 0.5, SG-PM 0.75, NIGT 5/7, custom 0.5].
    #[arg(long)]
    pub eta_power: Option<f64>,
    /// Index offset of the step rule [default: 1].
    #[arg(long)]
    pub eta_offset: Option<f64>,

    #[arg(long, value_enum)]
    pub problem: Option<ProblemName>,
    /// Synthetic data dimension (rows = columns).
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Seed of the synthetic data [default: the run seed].
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// CSV dataset with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Target column of --data, by name or zero-based index.
    #[arg(long)]
    pub target: Option<String>,
    /// Quadratic problem dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Quadratic condition number [default: 10].
    #[arg(long)]
    pub conditioning: Option<f64>,

    /// Noise kind [default: scalar when --sigma is given, otherwise none].
    #[arg(long, value_enum)]
    pub noise: Option<NoiseName>,
    /// Noise level sigma-tilde.
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Iteration limit [default: 1000 when no other limit is set].
    #[arg(long)]
    pub iters: Option<u64>,
    /// Oracle-call limit.
    #[arg(long)]
    pub oracle_calls: Option<u64>,
    /// Wall-time limit in seconds.
    #[arg(long)]
    pub wall_seconds: Option<f64>,

    /// Run seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial point: ones, zeros, or a comma-separated vector [default: ones].
    #[arg(long)]
    pub x0: Option<String>,
    /// Log exact metrics every this many iterations [default: 1].
    #[arg(long)]
    pub log_stride: Option<u64>,

    /// Target accuracy for the reported iteration threshold (needs --constants).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Problem constants f(x0)-f_low, sigma, L1, Lp for the rate report.
    #[arg(long, value_delimiter = ',')]
    pub constants: Option<Vec<f64>>,

    /// Output path [default: stdout].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format [default: from the extension, otherwise csv].
    #[arg(long, value_enum)]
    pub format: Option<FormatName>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    /// TOML file with settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CompareArgs {
    /// TOML file with shared settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// One algorithm as a flag string, e.g. "mem --p 3" or "sgpm --eta-scale 3". Repeatable.
    #[arg(long = "method", required = true)]
    pub methods: Vec<String>,
    /// Seeds as a range `a..b` or a list `1,2,3`.
    #[arg(long, default_value = "0..10")]
    pub seeds: String,
    /// Points on the oracle-call grid of the median series.
    #[arg(long, default_value_t = 50)]
    pub grid_points: usize,
    /// Also grid-search a step multiplier per method over these values (report only).
    #[arg(long, value_delimiter = ',')]
    pub tune: Option<Vec<f64>>,
    /// Seeds for --tune [default: 1000..1005].
    #[arg(long)]
    pub tune_seeds: Option<String>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest k of the weight-system sweeps.
    #[arg(long, default_value_t = 10_000)]
    pub cross_k_max: u64,
    /// Largest k of the bound sweeps.
    #[arg(long, default_value_t = 1_000_000)]
    pub bound_k_max: u64,
    /// Monte-Carlo draws of the noise checks.
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    /// Corrupt the weights to confirm the suite fails.
    #[arg(long, value_enum)]
    pub inject_fault: Option<FaultName>,
    /// Report path [default: stdout].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultName {
    ThetaSign,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Number of features.
    #[arg(long)]
    pub n: usize,
    /// Number of rows [default: n].
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub label_noise: f64,
    #[arg(long)]
    pub output: PathBuf,
}

fn read_settings_file(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Fields set in `top` replace those of `base`.
pub fn overlay(base: &Settings, top: &Settings) -> Result<Settings> {
    let ser = |s: &Settings| serde_json::to_value(s).map_err(|e| Error::Serialize(e.to_string()));
    let mut merged = ser(base)?;
    if let (Some(dst), serde_json::Value::Object(src)) = (merged.as_object_mut(), ser(top)?) {
        for (k, v) in src {
            if !v.is_null() {
                dst.insert(k, v);
            }
        }
    }
    serde_json::from_value(merged).map_err(|e| Error::Serialize(e.to_string()))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

fn step_rule(s: &Settings, scale: f64, power: f64) -> DecayRule {
    DecayRule::power(
        s.eta_scale.unwrap_or(scale),
        s.eta_power.unwrap_or(power),
        s.eta_offset.unwrap_or(1.0),
    )
}

fn resolve_algorithm(s: &Settings) -> Result<AlgorithmKind> {
    let alg = s.alg.unwrap_or(AlgName::Mem);
    if alg != AlgName::Mem && (s.p.is_some() || s.q.is_some() || s.schedule.is_some() || s.gammas.is_some()) {
        return Err(Error::invalid("--p/--q/--schedule/--gammas", "only apply to --alg mem"));
    }
    let kind = match alg {
        AlgName::Mem => {
            let p = s
                .p
                .ok_or_else(|| Error::invalid("--p", "--alg mem needs the schedule order --p (q = p - 1)"))?;
            let mode = s.schedule.unwrap_or(if p == 3 { ScheduleName::P3 } else { ScheduleName::General });
            if mode != ScheduleName::Custom
                && (s.gammas.is_some() || s.eta_power.is_some() || s.eta_offset.is_some() || s.gamma.is_some())
            {
                return Err(Error::invalid(
                    "--schedule",
                    "--gammas, --gamma, --eta-power, and --eta-offset need --schedule custom",
                ));
            }
            let mut schedule = match mode {
                ScheduleName::General => ScheduleConfig::general(p)?,
                ScheduleName::P3 => {
                    if p != 3 {
                        return Err(Error::invalid("--schedule", "p3 requires --p 3"));
                    }
                    ScheduleConfig::p3()
                }
                ScheduleName::Custom => {
                    let coefficients = s
                        .gammas
                        .clone()
                        .ok_or_else(|| Error::invalid("--gammas", "--schedule custom needs --gammas"))?;
                    let rule = CustomRule {
                        coefficients,
                        exponent: s.gamma_power.unwrap_or(0.0),
                        offset: s.gamma_offset.unwrap_or(1.0),
                        eta: DecayRule::power(1.0, s.eta_power.unwrap_or(0.5), s.eta_offset.unwrap_or(1.0)),
                    };
                    ScheduleConfig::custom(p, rule)?
                }
            };
            if let Some(q) = s.q {
                if q != schedule.q {
                    return Err(Error::invalid(
                        "--q",
                        format!("got {q} but the schedule uses {} extrapolations", schedule.q),
                    ));
                }
            }
            if let Some(scale) = s.eta_scale {
                schedule = schedule.with_eta_scale(positive("--eta-scale", scale)?);
            }
            AlgorithmKind::Mem { schedule }
        }
        AlgName::Sg => AlgorithmKind::Sg {
            eta: step_rule(s, 0.1, 0.5),
        },
        AlgName::Sgpm => AlgorithmKind::SgPm {
            gamma: DecayRule::power(
                s.gamma.unwrap_or(1.0),
                s.gamma_power.unwrap_or(0.5),
                s.gamma_offset.unwrap_or(1.0),
            )
            .capped(1.0),
            eta: step_rule(s, 1.0, 0.75),
        },
        AlgName::Nigt => {
            if s.gamma_power.is_some() || s.gamma_offset.is_some() {
                return Err(Error::invalid("--gamma-power", "NIGT uses a fixed --gamma"));
            }
            AlgorithmKind::Nigt {
                gamma: s.gamma.unwrap_or(0.1),
                eta: step_rule(s, 1.0, 5.0 / 7.0),
            }
        }
    };
    kind.validate()?;
    Ok(kind)
}

fn resolve_problem(s: &Settings) -> Result<ProblemSpec> {
    let name = s
        .problem
        .ok_or_else(|| Error::invalid("--problem", "missing; choose datafit, robust, or quadratic"))?;
    let source = || -> Result<DataSource> {
        match (s.synthetic, &s.data) {
            (Some(n), None) => Ok(DataSource::Synthetic { n, seed: s.data_seed }),
            (None, Some(path)) => Ok(DataSource::File {
                path: path.clone(),
                target: match &s.target {
                    Some(t) => t.parse().unwrap_or_else(|e: std::convert::Infallible| match e {}),
                    None => return Err(Error::invalid("--target", "--data needs the target column (name or index)")),
                },
            }),
            (Some(_), Some(_)) => Err(Error::invalid("--data", "give either --synthetic or --data, not both")),
            (None, None) => Err(Error::invalid(
                "--synthetic",
                "missing problem source; pass --synthetic N or --data PATH",
            )),
        }
    };
    Ok(match name {
        ProblemName::Datafit => ProblemSpec::Datafit { source: source()? },
        ProblemName::Robust => ProblemSpec::Robust { source: source()? },
        ProblemName::Quadratic => ProblemSpec::Quadratic {
            dim: s
                .dim
                .ok_or_else(|| Error::invalid("--dim", "--problem quadratic needs --dim"))?,
            conditioning: s.conditioning.unwrap_or(10.0),
        },
    })
}

fn resolve_noise(s: &Settings) -> Result<NoiseModel> {
    let kind = s
        .noise
        .unwrap_or(if s.sigma.is_some() { NoiseName::Scalar } else { NoiseName::None });
    let sigma = || {
        s.sigma
            .ok_or_else(|| Error::invalid("--sigma", "noise needs a level --sigma > 0"))
            .and_then(|v| positive("--sigma", v))
    };
    Ok(match kind {
        NoiseName::None => NoiseModel::none(),
        NoiseName::Scalar => NoiseModel::scalar(sigma()?),
        NoiseName::Elementwise => NoiseModel::elementwise(sigma()?),
    })
}

fn resolve_output(s: &Settings) -> Option<OutputSpec> {
    s.output.as_ref().map(|path| {
        let format = match s.format {
            Some(FormatName::Json) => OutputFormat::Json,
            Some(FormatName::Csv) => OutputFormat::Csv,
            None if path.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
            None => OutputFormat::Csv,
        };
        OutputSpec {
            path: path.clone(),
            format,
        }
    })
}

/// Applies defaults and validates.
pub fn resolve(s: &Settings) -> Result<RunConfig> {
    let budget = if s.iters.is_none() && s.oracle_calls.is_none() && s.wall_seconds.is_none() {
        Budget::iterations(DEFAULT_ITERATIONS)
    } else {
        Budget {
            iterations: s.iters,
            oracle_calls: s.oracle_calls,
            wall_seconds: s.wall_seconds,
        }
    };
    if let Some(c) = &s.constants {
        if c.len() != 4 {
            return Err(Error::invalid("--constants", "expects four values: f(x0)-f_low, sigma, L1, Lp"));
        }
    }
    let theory = match (&s.constants, s.epsilon) {
        (Some(c), Some(epsilon)) => Some(TheorySpec {
            constants: ProblemConstants {
                f0_minus_flow: c[0],
                sigma: c[1],
                l1: c[2],
                lp: c[3],
            },
            epsilon,
        }),
        (None, None) => None,
        _ => return Err(Error::invalid("--constants", "--constants and --epsilon go together")),
    };
    let config = RunConfig {
        algorithm: resolve_algorithm(s)?,
        problem: resolve_problem(s)?,
        noise: resolve_noise(s)?,
        budget,
        seed: s.seed.unwrap_or(0),
        x0: match &s.x0 {
            Some(v) => v.parse()?,
            None => InitialPoint::Ones,
        },
        log_stride: s.log_stride.unwrap_or(1),
        theory,
        output: resolve_output(s),
    };
    config.validate()?;
    Ok(config)
}

fn file_and_flags(config: Option<&Path>, flags: &Settings) -> Result<Settings> {
    match config {
        Some(path) => overlay(&read_settings_file(path)?, flags),
        None => Ok(flags.clone()),
    }
}

/// Parses `run` arguments (program name first) into a validated config.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    #[derive(Parser)]
    #[command(allow_negative_numbers = true)]
    struct RunOnly {
        #[command(flatten)]
        args: RunArgs,
    }
    let parsed = RunOnly::try_parse_from(argv).map_err(|e| Error::Config(e.to_string()))?;
    resolve(&file_and_flags(parsed.args.config.as_deref(), &parsed.args.settings)?)
}

/// Parses a `--method` string such as `"sgpm --eta-scale 3"`.
pub fn parse_method(spec: &str) -> Result<Settings> {
    #[derive(Parser)]
    #[command(allow_negative_numbers = true)]
    struct MethodOnly {
        #[command(flatten)]
        settings: Settings,
    }
    let mut tokens = spec.split_whitespace();
    let alg = tokens
        .next()
        .ok_or_else(|| Error::invalid("--method", "empty method"))?;
    let argv = ["method", "--alg", alg].into_iter().chain(tokens);
    MethodOnly::try_parse_from(argv)
        .map(|m| m.settings)
        .map_err(|e| Error::invalid("--method", format!("{spec:?}: {e}")))
}

/// `a..b` (half-open) or a comma-separated list.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::invalid("--seeds", format!("expected a..b or a list, got {spec:?}"));
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        spec.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn stdout_write<F: FnOnce(&mut dyn Write) -> Result<()>>(f: F) -> Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    f(&mut lock)?;
    lock.flush().map_err(|e| Error::io("<stdout>", e))
}

fn cmd_run(args: &RunArgs) -> Result<i32> {
    let settings = file_and_flags(args.config.as_deref(), &args.settings)?;
    let config = resolve(&settings)?;
    let experiment = run_experiment(&config)?;
    match (&config.output, settings.format) {
        (Some(out), _) => emit(&experiment, &out.path, out.format)?,
        (None, Some(FormatName::Json)) => stdout_write(|w| write_json(&json_report(&experiment), w))?,
        (None, _) => stdout_write(|w| {
            write_csv(&experiment.trajectory.records, w).map_err(|e| Error::Serialize(e.to_string()))
        })?,
    }
    if let Some(t) = experiment.theory {
        log::info!("M_{} = {:e}; iteration threshold {:e} at epsilon {}", t.p, t.m, t.iteration_threshold, t.epsilon);
    }
    Ok(0)
}

#[derive(Serialize)]
struct CompareReport<'a> {
    comparison: &'a Comparison,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    tuning: Vec<GridSearchResult>,
}

fn cmd_compare(args: &CompareArgs) -> Result<i32> {
    let shared = file_and_flags(args.config.as_deref(), &args.settings)?;
    let output = shared.output.clone();
    let configs = args
        .methods
        .iter()
        .map(|m| {
            let mut s = overlay(&shared, &parse_method(m)?)?;
            s.output = None;
            resolve(&s)
        })
        .collect::<Result<Vec<_>>>()?;
    let seeds = parse_seeds(&args.seeds)?;
    let comparison = compare(&configs, &seeds, args.grid_points)?;
    let mut tuning = Vec::new();
    if let Some(scales) = &args.tune {
        let tune_seeds = parse_seeds(args.tune_seeds.as_deref().unwrap_or("1000..1005"))?;
        for c in &configs {
            tuning.push(grid_search(c, scales, &tune_seeds)?);
        }
    }
    eprint!("{}", comparison.table());
    for t in &tuning {
        eprintln!("{}: best step multiplier {} (not applied)", t.label, t.best_scale);
    }
    let report = CompareReport {
        comparison: &comparison,
        tuning,
    };
    match output {
        Some(path) => {
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_json(&report, std::io::BufWriter::new(file))?;
        }
        None => stdout_write(|w| write_json(&report, w))?,
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let sweep = VerifySweep {
        seed: args.seed,
        cross_k_max: args.cross_k_max,
        bound_k_max: args.bound_k_max,
        noise_draws: args.draws,
        fault: args.inject_fault.map(|f| match f {
            FaultName::ThetaSign => Fault::ThetaSign,
        }),
        ..VerifySweep::default()
    };
    let report = verify_all(&sweep)?;
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    match &args.output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            write_json(&report, std::io::BufWriter::new(file))?;
        }
        None => stdout_write(|w| write_json(&report, w))?,
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_gen_data(args: &GenDataArgs) -> Result<i32> {
    let data = generate_synthetic_rows(args.rows.unwrap_or(args.n), args.n, args.seed, args.label_noise)?;
    write_csv_dataset(&data.dataset, &args.output)?;
    Ok(0)
}

/// Executes a parsed command and returns the process exit status.
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Verify(a) => cmd_verify(a),
        Command::GenData(a) => cmd_gen_data(a),
    }
}

/// JSON report of a single experiment, as written by `run --format json`.
pub fn experiment_json(config: &RunConfig) -> Result<String> {
    let e = run_experiment(config)?;
    serde_json::to_string_pretty(&json_report(&e)).map_err(|e| Error::Serialize(e.to_string()))
}
