use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::kernel::{factor, kernel_matrix};
use super::GpHyperparams;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Inputs `X` (row-major, `N × d`) and targets `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpDataset {
    x: Vec<f64>,
    d: usize,
    y: Vec<f64>,
}

impl GpDataset {
    /// Rejects ragged rows, non-finite values and rows closer than `1e-12`.
    pub fn new(rows: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: y.len() });
        }
        let d = rows.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::InvalidParameter("dataset needs at least one row and one feature".into()));
        }
        let mut x = Vec::with_capacity(rows.len() * d);
        for r in &rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: r.len() });
            }
            x.extend_from_slice(r);
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset entry".into()));
        }
        let data = Self { x, d, y };
        for i in 0..data.len() {
            for j in 0..i {
                let dist = data.row(i).iter().zip(data.row(j)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if dist <= 1e-12 {
                    return Err(Error::InvalidParameter(format!("rows {j} and {i} coincide")));
                }
            }
        }
        Ok(data)
    }

    /// `N` uniform inputs in `[0, 1]^d` with targets drawn from the GP prior
    /// with hyperparameters `truth`.
    pub fn synthetic(n: usize, d: usize, truth: &GpHyperparams, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let placeholder = Self::new(rows, vec![0.0; n])?;
        let chol = factor(&kernel_matrix(truth, &placeholder).k)?;
        let xi = nalgebra::DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = chol.l() * xi;
        Ok(Self { y: y.iter().copied().collect(), ..placeholder })
    }

    /// Headerless numeric CSV; column `target_col` is the target and every
    /// column is standardized to zero mean and unit variance.
    pub fn from_csv(path: impl AsRef<Path>, target_col: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cols: Option<usize> = None;
        let mut table: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::Parse { line: i + 1, msg: format!("expected {c} columns, found {}", row.len()) })
                }
                _ => {}
            }
            table.push(row);
        }
        let cols = cols.ok_or_else(|| Error::Parse { line: 0, msg: "empty file".into() })?;
        if target_col >= cols || cols < 2 {
            return Err(Error::InvalidParameter(format!("target column {target_col} with {cols} columns")));
        }
        for c in 0..cols {
            let n = table.len() as f64;
            let mean = table.iter().map(|r| r[c]).sum::<f64>() / n;
            let var = table.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for r in &mut table {
                r[c] = (r[c] - mean) / sd;
            }
        }
        let y = table.iter().map(|r| r[target_col]).collect();
        let rows = table
            .into_iter()
            .map(|r| r.into_iter().enumerate().filter(|(c, _)| *c != target_col).map(|(_, v)| v).collect())
            .collect();
        Self::new(rows, y)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }
}
