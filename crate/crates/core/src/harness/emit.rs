//! CSV and JSON writers for trajectories.
//!
//! Floats are written in their shortest round-trip form, so reading a file
//! back reproduces the records exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{OutputFormat, RunConfig};
use super::experiment::{Experiment, TheoryReport};
use crate::error::{Error, Result};
use crate::optimizer::{RunSummary, TrajectoryRecord};

pub const CSV_HEADER: [&str; 7] = ["k", "f_val", "rel_obj", "grad_norm", "mom_err", "oracle_calls", "elapsed_seconds"];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Serialize(format!("{}: {other:?}", path.display())),
    }
}

/// Header row, then one row per record; a missing `mom_err` is an empty field.
pub fn write_csv<W: Write>(records: &[TrajectoryRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> std::result::Result<Vec<TrajectoryRecord>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn read_csv_file(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file).map_err(|e| csv_error(path, e))
}

/// JSON document: the resolved configuration, the run summary, optional
/// rate-bound diagnostics, and the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub config: RunConfig,
    pub summary: RunSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryReport>,
    pub records: Vec<TrajectoryRecord>,
}

pub fn json_report(experiment: &Experiment) -> JsonReport {
    JsonReport {
        config: experiment.config.clone(),
        summary: experiment.trajectory.summary.clone(),
        theory: experiment.theory,
        records: experiment.trajectory.records.clone(),
    }
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Serialize(e.to_string()))?;
    out.write_all(b"\n").map_err(|e| Error::io("<output>", e))
}

/// Writes the experiment's records to `path` in `format`.
pub fn emit(experiment: &Experiment, path: &Path, format: OutputFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(&experiment.trajectory.records, &mut out).map_err(|e| csv_error(path, e))?,
        OutputFormat::Json => write_json(&json_report(experiment), &mut out)?,
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: u64, mom: Option<f64>) -> TrajectoryRecord {
        TrajectoryRecord {
            k,
            f_val: 0.1 + k as f64 / 3.0,
            rel_obj: 1.0 / 7.0,
            grad_norm: 1e-300,
            mom_err: mom,
            oracle_calls: 2 * k,
            elapsed_seconds: 0.25,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,f_val,rel_obj,grad_norm,mom_err,oracle_calls,elapsed_seconds\n");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let records = vec![rec(0, Some(std::f64::consts::PI)), rec(5, Some(f64::MIN_POSITIVE)), rec(9, None)];
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), records);
        assert!(String::from_utf8(buf).unwrap().lines().last().unwrap().contains(",,"));
    }
}
