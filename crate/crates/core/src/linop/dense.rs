use super::{check_dim, LinearOperator};
use crate::error::{Error, Result};

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
    symmetric: bool,
    spd: bool,
}

impl DenseMatrix {
    /// Builds from row-major data; symmetry is detected exactly.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n * n, data.len())?;
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {v}")));
        }
        let symmetric = (0..n).all(|i| (0..i).all(|j| data[i * n + j] == data[j * n + i]));
        Ok(Self { n, data, symmetric, spd: false })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            check_dim(n, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix required");
        let n = m.nrows();
        let data = (0..n).flat_map(|i| (0..n).map(move |j| m[(i, j)])).collect();
        Self::new(n, data).expect("finite nalgebra matrix")
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// Asserts positive definiteness. Only meaningful for symmetric matrices.
    pub fn assume_spd(mut self) -> Self {
        self.spd = self.symmetric;
        self
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = super::dot(self.row(i), x);
        }
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn is_spd(&self) -> bool {
        self.spd
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity {
    n: usize,
}

impl Identity {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn is_spd(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub struct Diagonal {
    diag: Vec<f64>,
}

impl Diagonal {
    pub fn new(diag: Vec<f64>) -> Self {
        Self { diag }
    }
}

impl LinearOperator for Diagonal {
    fn dim(&self) -> usize {
        self.diag.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = di * xi;
        }
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn is_spd(&self) -> bool {
        self.diag.iter().all(|&d| d > 0.0)
    }
}
