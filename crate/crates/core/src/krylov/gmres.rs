use super::{validate_system, IterationRecord, KrylovIteration, BREAKDOWN};
use crate::error::{Error, Result};
use crate::linop::{axpy, dot, norm2, residual, LinearOperator};

/// Unrestarted GMRES with a progressive least-squares update.
///
/// The Hessenberg columns are reduced by Givens rotations as they arrive, so
/// the rotated right-hand side `g` yields both the residual norm `|g_{j+1}|`
/// and the coefficient `γ_j` of the new direction `d_j = (v_j - Σ R_ij d_i) / R_jj`.
/// Then `x_{j+1} = x_j + γ_j d_j`, `‖A d_j‖ = 1`, and the improvement is
/// `γ_j² = ‖r_j‖² - ‖r_{j+1}‖²`.
pub struct Gmres<'a, A: LinearOperator + ?Sized> {
    op: &'a A,
    x: Vec<f64>,
    basis: Vec<Vec<f64>>,
    directions: Vec<Vec<f64>>,
    rotations: Vec<(f64, f64)>,
    /// Last entry of the rotated right-hand side; `|g| = ‖r_j‖`.
    g: f64,
    iter: usize,
    done: bool,
}

impl<'a, A: LinearOperator + ?Sized> Gmres<'a, A> {
    pub fn new(op: &'a A, b: &'a [f64], x0: &[f64]) -> Result<Self> {
        validate_system(op, b, x0)?;
        let r0 = residual(op, b, x0)?;
        let beta = norm2(&r0);
        let basis = if beta > 0.0 { vec![r0.iter().map(|v| v / beta).collect()] } else { Vec::new() };
        Ok(Self {
            op,
            x: x0.to_vec(),
            basis,
            directions: Vec::new(),
            rotations: Vec::new(),
            g: beta,
            iter: 0,
            done: beta == 0.0,
        })
    }
}

impl<A: LinearOperator + ?Sized> KrylovIteration for Gmres<'_, A> {
    fn step(&mut self) -> Result<IterationRecord> {
        let j = self.iter;
        if self.done {
            return Err(Error::Breakdown { iteration: j, reason: "Krylov space exhausted" });
        }
        let n = self.x.len();
        let mut w = vec![0.0; n];
        self.op.apply(&self.basis[j], &mut w);

        // Modified Gram-Schmidt with one reorthogonalization pass.
        let mut h = vec![0.0; j + 2];
        for _ in 0..2 {
            for (i, v) in self.basis.iter().enumerate() {
                let c = dot(&w, v);
                h[i] += c;
                axpy(-c, v, &mut w);
            }
        }
        let subdiag = norm2(&w);
        h[j + 1] = subdiag;

        for (i, &(c, s)) in self.rotations.iter().enumerate() {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = -s * a + c * b;
        }
        let diag = h[j].hypot(h[j + 1]);
        if !(diag > BREAKDOWN) {
            return Err(Error::Breakdown { iteration: j, reason: "singular Hessenberg column" });
        }
        let (c, s) = (h[j] / diag, h[j + 1] / diag);
        self.rotations.push((c, s));
        let gamma = c * self.g;
        let g_next = -s * self.g;

        let mut d = self.basis[j].clone();
        for (i, di) in self.directions.iter().enumerate() {
            axpy(-h[i], di, &mut d);
        }
        for v in d.iter_mut() {
            *v /= diag;
        }
        let delta_x: Vec<f64> = d.iter().map(|v| gamma * v).collect();
        for (xi, dxi) in self.x.iter_mut().zip(&delta_x) {
            *xi += dxi;
        }
        self.directions.push(d);

        let happy = !(subdiag > BREAKDOWN);
        if happy || j + 1 >= n {
            self.done = true;
        } else {
            self.basis.push(w.iter().map(|v| v / subdiag).collect());
        }
        self.g = g_next;
        self.iter += 1;
        Ok(IterationRecord {
            index: j,
            alpha: None,
            q_norm_sq: None,
            improvement: gamma * gamma,
            delta_x,
            residual_norm: g_next.abs(),
            exact: happy,
        })
    }

    fn solution(&self) -> &[f64] {
        &self.x
    }

    fn residual_norm(&self) -> f64 {
        self.g.abs()
    }

    fn iterations(&self) -> usize {
        self.iter
    }

    fn exhausted(&self) -> bool {
        self.done
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::{DenseMatrix, Identity};

    #[test]
    fn identity_one_step() {
        let b = [2.0, 0.0, -1.0];
        let id = Identity::new(3);
        let mut g = Gmres::new(&id, &b, &[0.0; 3]).unwrap();
        let rec = g.step().unwrap();
        assert!((rec.improvement - 5.0).abs() < 1e-14);
        assert!(rec.exact);
        assert!(g.exhausted());
        for (x, b) in g.solution().iter().zip(&b) {
            assert!((x - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_matrix_two_steps() {
        // A = [[0, 1], [-1, 0]], b = e1: x* = (0, 1). The first step makes no
        // progress (A b ⟂ b), the second is exact.
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let b = [1.0, 0.0];
        let mut g = Gmres::new(&a, &b, &[0.0; 2]).unwrap();
        let first = g.step().unwrap();
        assert!(first.improvement.abs() < 1e-15);
        assert!((first.residual_norm - 1.0).abs() < 1e-15);
        let second = g.step().unwrap();
        assert!(second.residual_norm < 1e-15);
        assert!((g.solution()[0]).abs() < 1e-15);
        assert!((g.solution()[1] - 1.0).abs() < 1e-15);
    }
}
