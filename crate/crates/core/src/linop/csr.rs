use super::{check_dim, DenseMatrix, LinearOperator};
use crate::error::{Error, Result};

/// Square compressed-sparse-row matrix.
///
/// Invariants: `row_offsets` has `n + 1` non-decreasing entries ending at
/// `nnz`; column indices are strictly increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
    spd: bool,
}

impl CsrMatrix {
    pub fn from_parts(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_dim(n + 1, row_offsets.len())?;
        check_dim(col_indices.len(), values.len())?;
        if row_offsets[0] != 0 || row_offsets[n] != values.len() {
            return Err(Error::InvalidParameter("row offsets do not span the entries".into()));
        }
        for i in 0..n {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::InvalidParameter(format!("row offsets decrease at row {i}")));
            }
            let cols = &col_indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= n) {
                return Err(Error::InvalidParameter(format!("bad column indices in row {i}")));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {v}")));
        }
        let mut m = Self { n, row_offsets, col_indices, values, symmetric: false, spd: false };
        m.symmetric = m.detect_symmetry();
        Ok(m)
    }

    /// Builds from `(row, col, value)` triplets in any order; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|(i, j, _)| *i >= n || *j >= n) {
            return Err(Error::InvalidParameter(format!("entry ({i}, {j}) outside {n}x{n}")));
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_offsets[i + 1] += 1;
            col_indices.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::from_parts(n, row_offsets, col_indices, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        self.col_indices[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn assume_spd(mut self) -> Self {
        self.spd = self.symmetric;
        self
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let slot = next[j];
                cols[slot] = i;
                vals[slot] = v;
                next[j] += 1;
            }
        }
        let mut t = Self {
            n: self.n,
            row_offsets: counts,
            col_indices: cols,
            values: vals,
            symmetric: self.symmetric,
            spd: self.spd,
        };
        t.symmetric = t.detect_symmetry();
        t
    }

    /// `M Mᵀ`. Entry `(i, j)` accumulates `M[i,k] M[j,k]` in increasing `k`
    /// for both `(i, j)` and `(j, i)`, so the result is exactly symmetric.
    pub fn gram_outer(&self) -> Self {
        let mt = self.transpose();
        let n = self.n;
        let mut acc = vec![0.0; n];
        let mut touched = vec![false; n];
        let mut pattern: Vec<usize> = Vec::new();
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            for (k, mik) in self.row(i) {
                for (j, mjk) in mt.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += mik * mjk;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                col_indices.push(j);
                values.push(acc[j]);
                acc[j] = 0.0;
                touched[j] = false;
            }
            pattern.clear();
            row_offsets.push(col_indices.len());
        }
        Self::from_parts(n, row_offsets, col_indices, values).expect("valid product structure")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut data = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                data[i * self.n + j] = v;
            }
        }
        let d = DenseMatrix::new(self.n, data).expect("finite entries");
        if self.spd {
            d.assume_spd()
        } else {
            d
        }
    }

    fn detect_symmetry(&self) -> bool {
        let t = TransposeView::new(self);
        (0..self.n).all(|i| t.row_matches(self, i))
    }
}

struct TransposeView {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TransposeView {
    fn new(m: &CsrMatrix) -> Self {
        let mut offsets = vec![0usize; m.n + 1];
        for &j in &m.col_indices {
            offsets[j + 1] += 1;
        }
        for j in 0..m.n {
            offsets[j + 1] += offsets[j];
        }
        let mut next = offsets.clone();
        let mut cols = vec![0; m.nnz()];
        let mut vals = vec![0.0; m.nnz()];
        for i in 0..m.n {
            for (j, v) in m.row(i) {
                cols[next[j]] = i;
                vals[next[j]] = v;
                next[j] += 1;
            }
        }
        Self { offsets, cols, vals }
    }

    fn row_matches(&self, m: &CsrMatrix, i: usize) -> bool {
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        let (mlo, mhi) = (m.row_offsets[i], m.row_offsets[i + 1]);
        self.cols[lo..hi] == m.col_indices[mlo..mhi] && self.vals[lo..hi] == m.values[mlo..mhi]
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            *yi = self.col_indices[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn is_spd(&self) -> bool {
        self.spd
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(2, vec![(1, 0, 2.0), (0, 1, 1.0), (0, 1, 0.5)]).unwrap();
        assert_eq!(m.row_offsets(), &[0, 1, 2]);
        assert_eq!(m.values(), &[1.5, 2.0]);
        assert!(!m.is_symmetric());
    }

    #[test]
    fn rejects_unsorted_columns() {
        let err = CsrMatrix::from_parts(2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn transpose_round_trips() {
        let m = CsrMatrix::from_triplets(3, vec![(0, 2, 1.0), (2, 1, -3.0), (1, 1, 4.0)]).unwrap();
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose().to_dense().get(2, 0), 1.0);
    }
}
