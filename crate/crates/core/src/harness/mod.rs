//! Configuration, experiment execution, output, and the CLI.

pub mod cli;
pub mod config;
pub mod emit;
pub mod experiment;
pub mod verify_all;

pub use config::{DataSource, InitialPoint, OutputFormat, OutputSpec, ProblemSpec, RunConfig, TheorySpec};
pub use emit::{emit, read_csv, read_csv_file, write_csv, JsonReport, CSV_HEADER};
pub use experiment::{compare, grid_search, log_grid, median, run_experiment, scale_step, Comparison, Experiment};
pub use verify_all::{verify_all, Fault, VerificationReport, VerifySweep};
