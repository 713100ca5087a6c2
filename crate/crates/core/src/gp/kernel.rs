use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::GpDataset;
use crate::error::{Error, Result};
use crate::linop::DenseMatrix;

/// Log-parameterized RBF hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyperparams {
    pub log_gamma: f64,
    pub log_l: f64,
    pub log_sigma2: f64,
}

impl GpHyperparams {
    pub fn new(gamma: f64, l: f64, sigma2: f64) -> Result<Self> {
        if !(gamma > 0.0 && l > 0.0 && sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!("hyperparameters ({gamma}, {l}, {sigma2}) must be positive")));
        }
        Ok(Self { log_gamma: gamma.ln(), log_l: l.ln(), log_sigma2: sigma2.ln() })
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self { log_gamma: v[0], log_l: v[1], log_sigma2: v[2] }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.log_gamma, self.log_l, self.log_sigma2]
    }

    pub fn gamma(&self) -> f64 {
        self.log_gamma.exp()
    }

    pub fn l(&self) -> f64 {
        self.log_l.exp()
    }

    pub fn sigma2(&self) -> f64 {
        self.log_sigma2.exp()
    }
}

/// `K` and its derivatives with respect to the log-parameters.
#[derive(Debug, Clone)]
pub struct KernelMatrices {
    pub k: DenseMatrix,
    /// `∂K/∂log γ`, `∂K/∂log l`, `∂K/∂log σ²`.
    pub grads: [DenseMatrix; 3],
}

/// `k(x_i, x_j) = γ exp(-‖x_i - x_j‖² / 2l²) + σ² δ_ij`.
pub fn kernel_matrix(params: &GpHyperparams, data: &GpDataset) -> KernelMatrices {
    let n = data.len();
    let (gamma, l2, s2) = (params.gamma(), params.l() * params.l(), params.sigma2());
    let mut k = vec![0.0; n * n];
    let mut dl = vec![0.0; n * n];
    let mut dg = vec![0.0; n * n];
    let mut ds = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let r2: f64 = data.row(i).iter().zip(data.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            let e = gamma * (-0.5 * r2 / l2).exp();
            let kij = if i == j { e + s2 } else { e };
            let lij = e * r2 / l2;
            for (m, v) in [(&mut k, kij), (&mut dg, e), (&mut dl, lij)] {
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        ds[i * n + i] = s2;
    }
    let dense = |v| DenseMatrix::new(n, v).expect("finite kernel entries");
    KernelMatrices { k: dense(k).assume_spd(), grads: [dense(dg), dense(dl), dense(ds)] }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMll {
    /// `½ yᵀK⁻¹y + ½ log det K + (N/2) log 2π`.
    pub loss: f64,
    pub grad: [f64; 3],
}

pub(crate) fn factor(k: &DenseMatrix) -> Result<Cholesky<f64, Dyn>> {
    let m = k.to_nalgebra();
    if let Some(c) = m.clone().cholesky() {
        return Ok(c);
    }
    let n = m.nrows();
    let jitter = 1e-8 * m.diagonal().sum() / n as f64;
    (m + DMatrix::identity(n, n) * jitter)
        .cholesky()
        .ok_or_else(|| Error::Cholesky(format!("kernel matrix not positive definite after jitter {jitter:e}")))
}

/// Loss and gradient by dense Cholesky.
pub fn exact_mll_and_grad(params: &GpHyperparams, data: &GpDataset) -> Result<ExactMll> {
    let km = kernel_matrix(params, data);
    let chol = factor(&km.k)?;
    let n = data.len();
    let y = DVector::from_column_slice(data.targets());
    let alpha = chol.solve(&y);
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().take(n).map(|d| d.ln()).sum::<f64>();
    let loss = 0.5 * y.dot(&alpha) + 0.5 * log_det + 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    let kinv = chol.inverse();
    let mut grad = [0.0; 3];
    for (g, dk) in grad.iter_mut().zip(&km.grads) {
        let dk = dk.to_nalgebra();
        let trace = kinv.component_mul(&dk).sum();
        let quad = alpha.dot(&(&dk * &alpha));
        *g = 0.5 * (trace - quad);
    }
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("marginal likelihood".into()));
    }
    Ok(ExactMll { loss, grad })
}
