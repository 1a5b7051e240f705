//! Synthetic instances and CSV ingestion.

use std::collections::BTreeSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::linreg::RegressionInstance;
use crate::tree::LabeledDataset2C;

/// Parameters of a synthetic regression instance with exact moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    /// Common correlation between every pair of features.
    pub rho: f64,
    pub beta_star: Vec<f64>,
    pub noise_variance: f64,
    pub n: usize,
}

impl ToySpec {
    /// Two correlated features (height, weight) predicting age.
    pub fn height_weight() -> Self {
        Self {
            rho: 0.9,
            beta_star: vec![2.12, -0.94],
            noise_variance: 0.25,
            n: 100,
        }
    }

    fn covariance(&self) -> Vec<f64> {
        let d = self.beta_star.len();
        let mut s = vec![self.rho; d * d];
        for i in 0..d {
            s[i * d + i] = 1.0;
        }
        s
    }
}

/// Builds `X` with `X'X / n` equal to the equicorrelation matrix and
/// `y = X beta* + eps`, where `eps` is orthogonal to every column of `X` and
/// `|eps|^2 / n` equals the noise variance. The cost of any `beta` is then
/// exactly `(beta* - beta)' S (beta* - beta) + noise_variance`.
///
/// Columns are also orthogonal to the constant vector, so the data are
/// centered. That needs `n >= d + 2`.
pub fn toy_dataset(toy: &ToySpec, seed: u64) -> Result<RegressionInstance> {
    let d = toy.beta_star.len();
    let n = toy.n;
    if d == 0 {
        return Err(Error::InvalidConfig(
            "beta* must have at least one entry".into(),
        ));
    }
    if !(toy.noise_variance >= 0.0 && toy.noise_variance.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise variance must be nonnegative, got {}",
            toy.noise_variance
        )));
    }
    if n < d + 2 {
        return Err(Error::InvalidConfig(format!(
            "n = {n} is too small; need n >= d + 2 = {} for centered columns and a noise direction",
            d + 2
        )));
    }
    let l = linalg::cholesky(&toy.covariance(), d).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "correlation {} does not give a positive definite covariance for d = {d}",
            toy.rho
        ))
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    while basis.len() < d + 2 {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm0 = linalg::dot(&v, &v).sqrt();
        // two passes of modified Gram-Schmidt keep the frame orthonormal to rounding
        for _ in 0..2 {
            for b in &basis {
                let p = linalg::dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, bi)| *x -= p * bi);
            }
        }
        let norm = linalg::dot(&v, &v).sqrt();
        if norm > 1e-8 * norm0 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }

    let root_n = (n as f64).sqrt();
    let mut x = vec![0.0; n * d];
    for r in 0..n {
        for j in 0..d {
            // row r of sqrt(n) Q L'
            x[r * d + j] = root_n * (0..=j).map(|a| basis[1 + a][r] * l[j * d + a]).sum::<f64>();
        }
    }
    let noise_scale = toy.noise_variance.sqrt() * root_n;
    let y: Vec<f64> = (0..n)
        .map(|r| {
            let fit: f64 = (0..d).map(|j| x[r * d + j] * toy.beta_star[j]).sum();
            fit + noise_scale * basis[d + 1][r]
        })
        .collect();
    let names = if d == 2 {
        vec!["Height".to_string(), "Weight".to_string()]
    } else {
        (1..=d).map(|j| format!("x{j}")).collect()
    };
    RegressionInstance::new(x, y, names, "Age")
}

/// Numeric table read from a CSV file.
#[derive(Debug, Clone)]
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    dropped: usize,
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn column_positions(headers: &csv::StringRecord, wanted: &[String]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))
        })
        .collect()
}

/// Reads the named numeric columns; rows with a missing or non-numeric entry
/// in any of them are dropped and counted.
fn read_numeric(path: &Path, columns: Vec<String>) -> Result<Table> {
    let mut reader = open(path)?;
    let headers = reader.headers()?.clone();
    let pos = column_positions(&headers, &columns)?;
    let mut rows = Vec::new();
    let mut dropped = 0;
    for record in reader.records() {
        let record = record?;
        let parsed: Option<Vec<f64>> = pos
            .iter()
            .map(|&p| {
                record
                    .get(p)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
            })
            .collect();
        match parsed {
            Some(row) => rows.push(row),
            None => dropped += 1,
        }
    }
    Ok(Table {
        columns,
        rows,
        dropped,
    })
}

fn header_names(path: &Path) -> Result<Vec<String>> {
    Ok(open(path)?.headers()?.iter().map(str::to_string).collect())
}

/// Summary of what ingestion did to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub standardized: bool,
}

/// Population mean and standard deviation of column `j`.
fn column_stats(rows: &[Vec<f64>], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn check_table(table: &Table) -> Result<()> {
    if table.dropped > 0 {
        log::warn!(
            "dropped {} rows with missing or non-numeric values",
            table.dropped
        );
    }
    if table.rows.len() < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            found: table.rows.len(),
        });
    }
    for (j, name) in table.columns.iter().enumerate() {
        let first = table.rows[0][j];
        if table.rows.iter().all(|r| r[j] == first) {
            return Err(Error::ConstantColumn(name.clone()));
        }
    }
    Ok(())
}

/// Loads a regression problem. `features` defaults to every column other than
/// the target. With `standardize`, features and target are centered and
/// scaled to unit population variance.
pub fn load_regression_csv(
    path: &Path,
    target: &str,
    features: Option<&[String]>,
    standardize: bool,
) -> Result<(RegressionInstance, LoadReport)> {
    let headers = header_names(path)?;
    if !headers.iter().any(|h| h == target) {
        return Err(Error::MissingColumn(target.to_string()));
    }
    let mut columns: Vec<String> = match features {
        Some(f) => f.to_vec(),
        None => headers.into_iter().filter(|h| h != target).collect(),
    };
    if columns.is_empty() {
        return Err(Error::InvalidData("no feature columns".into()));
    }
    columns.push(target.to_string());
    let mut table = read_numeric(path, columns)?;
    check_table(&table)?;

    if standardize {
        for j in 0..table.columns.len() {
            let (mean, sd) = column_stats(&table.rows, j);
            if sd == 0.0 {
                return Err(Error::ConstantColumn(table.columns[j].clone()));
            }
            table
                .rows
                .iter_mut()
                .for_each(|r| r[j] = (r[j] - mean) / sd);
        }
    }

    let d = table.columns.len() - 1;
    let mut x = Vec::with_capacity(table.rows.len() * d);
    let mut y = Vec::with_capacity(table.rows.len());
    for r in &table.rows {
        x.extend_from_slice(&r[..d]);
        y.push(r[d]);
    }
    let report = LoadReport {
        rows_used: table.rows.len(),
        rows_dropped: table.dropped,
        standardized: standardize,
    };
    table.columns.pop();
    Ok((
        RegressionInstance::new(x, y, table.columns, target)?,
        report,
    ))
}

/// Loads a two-class dataset. The label column may hold any strings; class 0
/// is the label that sorts first. With `normalize`, features are rescaled to
/// `[0, 1]` by their min and max.
pub fn load_labeled_csv(
    path: &Path,
    label: &str,
    features: Option<&[String]>,
    normalize: bool,
) -> Result<(LabeledDataset2C, LoadReport)> {
    let mut reader = open(path)?;
    let headers = reader.headers()?.clone();
    let label_pos = column_positions(&headers, &[label.to_string()])?[0];
    let columns: Vec<String> = match features {
        Some(f) => f.to_vec(),
        None => headers
            .iter()
            .filter(|h| *h != label)
            .map(str::to_string)
            .collect(),
    };
    let pos = column_positions(&headers, &columns)?;
    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    let mut dropped = 0;
    for record in reader.records() {
        let record = record?;
        let parsed: Option<Vec<f64>> = pos
            .iter()
            .map(|&p| {
                record
                    .get(p)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
            })
            .collect();
        let lab = record.get(label_pos).filter(|s| !s.is_empty());
        match (parsed, lab) {
            (Some(row), Some(lab)) => {
                rows.push(row);
                raw_labels.push(lab.to_string());
            }
            _ => dropped += 1,
        }
    }
    let table = Table {
        columns,
        rows,
        dropped,
    };
    check_table(&table)?;

    let classes: Vec<String> = raw_labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() > 2 {
        return Err(Error::InvalidData(format!(
            "expected at most two classes in column {label}, found {}",
            classes.len()
        )));
    }
    let labels: Vec<u8> = raw_labels
        .iter()
        .map(|l| u8::from(*l != classes[0]))
        .collect();
    let data = LabeledDataset2C::new(table.rows, labels, classes, table.columns)?;
    let data = if normalize { data.normalized() } else { data };
    let report = LoadReport {
        rows_used: data.n(),
        rows_dropped: dropped,
        standardized: normalize,
    };
    Ok((data, report))
}
