//! Linear operators and the vector kernels shared by every solver.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; operators implement
//! [`LinearOperator`] and carry symmetry / positive-definiteness flags that
//! the solvers check before running.

mod csr;
mod dense;
mod generate;
mod mmio;

pub use csr::CsrMatrix;
pub use dense::{DenseMatrix, Diagonal, Identity};
pub use generate::{gaussian_vector, gen_sparse_spd, SpdGenParams};
pub use mmio::{
    read_matrix_market, read_matrix_market_from, read_vector, write_matrix_market, write_matrix_market_to, write_vector,
};

use crate::error::{Error, Result};

/// Anything that can apply `y = A x` to a dense vector.
///
/// Implementations must be deterministic and linear; they are shared
/// read-only between concurrent trials.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `A x` into `y`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn is_symmetric(&self) -> bool;

    /// Positive definiteness as asserted by whoever built the operator.
    fn is_spd(&self) -> bool;
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
    fn is_spd(&self) -> bool {
        (**self).is_spd()
    }
}

impl<T: LinearOperator + ?Sized + Send> LinearOperator for std::sync::Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
    fn is_spd(&self) -> bool {
        (**self).is_spd()
    }
}

/// Checked `A x`.
pub fn matvec<A: LinearOperator + ?Sized>(op: &A, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(op.dim(), x.len())?;
    let mut y = vec![0.0; op.dim()];
    op.apply(x, &mut y);
    Ok(y)
}

/// `xᵀ A x`; requires a symmetric operator.
pub fn energy_norm_sq<A: LinearOperator + ?Sized>(op: &A, x: &[f64]) -> Result<f64> {
    if !op.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let ax = matvec(op, x)?;
    Ok(dot(x, &ax))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Inner product with four interleaved accumulators.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 4];
    let (ca, ra) = a.as_chunks::<4>();
    let (cb, rb) = b.as_chunks::<4>();
    for (x, y) in ca.iter().zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `b - A x`
pub fn residual<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_dim(op.dim(), b.len())?;
    let mut r = matvec(op, x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok(r)
}

/// Dense copy of `op`, assembled column by column from `A e_j`.
pub fn to_nalgebra<A: LinearOperator + ?Sized>(op: &A) -> nalgebra::DMatrix<f64> {
    let n = op.dim();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        m.column_mut(j).copy_from_slice(&col);
    }
    m
}

/// Reference solution of `A x = b` by a dense factorization: Cholesky for
/// SPD-flagged operators, partial-pivot LU otherwise.
pub fn direct_solve<A: LinearOperator + ?Sized>(op: &A, b: &[f64]) -> Result<Vec<f64>> {
    check_dim(op.dim(), b.len())?;
    let m = to_nalgebra(op);
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = if op.is_spd() {
        m.cholesky()
            .ok_or_else(|| Error::Cholesky("operator flagged SPD is not positive definite".into()))?
            .solve(&rhs)
    } else {
        m.lu().solve(&rhs).ok_or_else(|| Error::Degenerate("singular operator".into()))?
    };
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(matvec(&Identity::new(3), &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let d = Diagonal::new(vec![10.0; 4]);
        assert_eq!(matvec(&d, &[1.0; 4]).unwrap(), vec![10.0; 4]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = matvec(&Identity::new(3), &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn energy_norms() {
        assert_eq!(energy_norm_sq(&Identity::new(2), &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(energy_norm_sq(&Diagonal::new(vec![2.0, 8.0]), &[1.0, 1.0]).unwrap(), 10.0);
        let ns = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(energy_norm_sq(&ns, &[1.0, 1.0]), Err(Error::NotSymmetric)));
    }

    #[test]
    fn energy_norm_matches_triple_product() {
        let mut rng = seeded(11);
        let n = 5;
        let m: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        // A = M Mᵀ + I, assembled independently with nalgebra.
        let mm = nalgebra::DMatrix::from_row_slice(n, n, &m);
        let a = &mm * mm.transpose() + nalgebra::DMatrix::identity(n, n);
        let op = DenseMatrix::from_nalgebra(&a).assume_spd();
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let xv = nalgebra::DVector::from_column_slice(&x);
        let expected = (xv.transpose() * &a * &xv)[(0, 0)];
        let got = energy_norm_sq(&op, &x).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected.abs());
        assert!(got >= 0.0);
    }

    #[test]
    fn csr_matches_densification() {
        let a = gen_sparse_spd(&SpdGenParams { n: 30, density: 0.2, diag: 10.0, seed: 3 }).unwrap();
        let dense = a.to_dense();
        let mut rng = seeded(4);
        let x: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
        let y1 = matvec(&a, &x).unwrap();
        let y2 = matvec(&dense, &x).unwrap();
        let scale = norm2(&y2);
        for (u, v) in y1.iter().zip(&y2) {
            assert!((u - v).abs() <= 1e-12 * scale);
        }
    }

    proptest! {
        #[test]
        fn matvec_is_linear(seed in 0u64..1000, alpha in -5.0f64..5.0, beta in -5.0f64..5.0) {
            let a = gen_sparse_spd(&SpdGenParams { n: 12, density: 0.3, diag: 9.0, seed }).unwrap();
            let mut rng = seeded(seed.wrapping_add(17));
            let x: Vec<f64> = (0..12).map(|_| rng.sample(StandardNormal)).collect();
            let y: Vec<f64> = (0..12).map(|_| rng.sample(StandardNormal)).collect();
            let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| alpha * u + beta * v).collect();
            let lhs = matvec(&a, &combo).unwrap();
            let ax = matvec(&a, &x).unwrap();
            let ay = matvec(&a, &y).unwrap();
            let rhs: Vec<f64> = ax.iter().zip(&ay).map(|(u, v)| alpha * u + beta * v).collect();
            let scale = norm2(&ax).abs() * alpha.abs() + norm2(&ay) * beta.abs() + 1e-300;
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - r).abs() <= 1e-12 * scale);
            }
        }
    }
}
