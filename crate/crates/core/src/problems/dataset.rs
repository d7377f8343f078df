use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::objectives::sigmoid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Synthetic { seed: u64 },
    File { path: PathBuf },
    Inline,
}

/// Row-major feature matrix `a_1..a_m` with targets `b_1..b_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    targets: Vec<f64>,
    cols: usize,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(features: Vec<f64>, targets: Vec<f64>, cols: usize, provenance: Provenance) -> Result<Self> {
        if cols == 0 || features.len() != targets.len() * cols {
            return Err(Error::invalid(
                "dataset",
                format!(
                    "{} feature values do not form {} rows of {} columns",
                    features.len(),
                    targets.len(),
                    cols
                ),
            ));
        }
        Ok(Self {
            features,
            targets,
            cols,
            provenance,
        })
    }

    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.cols..(i + 1) * self.cols]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.features
            .chunks_exact(self.cols)
            .zip(self.targets.iter().copied())
    }
}

/// A synthetic dataset together with the planted solution.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub x_star: Vec<f64>,
}

/// `m` rows in `n` dimensions: `a_i, x* ~ N(0, I)`, `b_i = s(a_iᵀx*) + label_noise·e_i`
/// with `e_i ~ N(0, 1)`. Draw order is features, then `x*`, then `e`, all from
/// one ChaCha8 stream seeded by `seed`.
pub fn generate_synthetic_rows(m: usize, n: usize, seed: u64, label_noise: f64) -> Result<SyntheticData> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("n", "synthetic data needs at least one row and column"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let features: Vec<f64> = (0..m * n).map(|_| normal()).collect();
    let x_star: Vec<f64> = (0..n).map(|_| normal()).collect();
    let noise: Vec<f64> = (0..m).map(|_| normal()).collect();
    let targets = features
        .chunks_exact(n)
        .zip(&noise)
        .map(|(a, e)| sigmoid(crate::vector::dot(a, &x_star)) + label_noise * e)
        .collect();
    Ok(SyntheticData {
        dataset: Dataset::new(features, targets, n, Provenance::Synthetic { seed })?,
        x_star,
    })
}

/// Square synthetic data-fitting instance (`m = n`, label noise 0.1).
pub fn generate_synthetic(n: usize, seed: u64) -> Result<Dataset> {
    Ok(generate_synthetic_rows(n, n, seed, 0.1)?.dataset)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for TargetColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(s.to_string()),
        })
    }
}

/// Reads a comma-separated file with a header row, splits off the target
/// column, and min-max rescales every column to `[0, 1]` (constant columns
/// become 0).
pub fn load_csv_dataset(path: &Path, target: &TargetColumn) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Dataset {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Dataset {
            path: path.to_path_buf(),
            message: "empty file".into(),
        });
    }
    if headers.len() < 2 {
        return Err(Error::Dataset {
            path: path.to_path_buf(),
            message: "need at least one feature column and one target column".into(),
        });
    }
    let target_idx = match target {
        TargetColumn::Index(i) if *i < headers.len() => *i,
        TargetColumn::Index(i) => {
            return Err(Error::Dataset {
                path: path.to_path_buf(),
                message: format!("target column {i} out of range ({} columns)", headers.len()),
            })
        }
        TargetColumn::Name(name) => headers.iter().position(|h| h == name).ok_or_else(|| Error::Dataset {
            path: path.to_path_buf(),
            message: format!("no column named `{name}`"),
        })?,
    };

    let ncols = headers.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); ncols];
    for (i, record) in reader.records().enumerate() {
        // Line numbers are 1-based and the header occupies line 1.
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: line,
            column: "-".into(),
            message: e.to_string(),
        })?;
        if record.len() != ncols {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: line,
                column: "-".into(),
                message: format!("expected {ncols} fields, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                row: line,
                column: headers[j].clone(),
                message: format!("`{cell}` is not a finite number"),
            })?;
            columns[j].push(v);
        }
    }
    let m = columns[0].len();
    if m == 0 {
        return Err(Error::Dataset {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    for col in &mut columns {
        rescale_unit(col);
    }

    let targets = columns[target_idx].clone();
    let feature_cols: Vec<&Vec<f64>> = columns
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != target_idx)
        .map(|(_, c)| c)
        .collect();
    let n = feature_cols.len();
    let mut features = Vec::with_capacity(m * n);
    for i in 0..m {
        features.extend(feature_cols.iter().map(|c| c[i]));
    }
    log::info!("loaded {}: {m} rows, {n} feature columns", path.display());
    Dataset::new(
        features,
        targets,
        n,
        Provenance::File {
            path: path.to_path_buf(),
        },
    )
}

fn rescale_unit(col: &mut [f64]) {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    for v in col.iter_mut() {
        *v = if range > 0.0 { ((*v - lo) / range).clamp(0.0, 1.0) } else { 0.0 };
    }
}

/// Writes features as `x1..xn` and the target as `b`, in the format
/// [`load_csv_dataset`] reads (values are not rescaled on write).
pub fn write_csv_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut header: Vec<String> = (1..=data.cols()).map(|j| format!("x{j}")).collect();
    header.push("b".into());
    writer.write_record(&header).map_err(|e| csv_io(path, e))?;
    for (a, b) in data.iter_rows() {
        let mut row: Vec<String> = a.iter().map(|v| v.to_string()).collect();
        row.push(b.to_string());
        writer.write_record(&row).map_err(|e| csv_io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}
