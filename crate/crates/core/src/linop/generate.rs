use rand::Rng;
use rand_distr::StandardNormal;

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// Parameters of the random SPD test family `A = M Mᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdGenParams {
    pub n: usize,
    /// Probability that an off-diagonal entry of `M` is nonzero.
    pub density: f64,
    /// Constant written to the diagonal of `M` before forming `M Mᵀ`.
    pub diag: f64,
    pub seed: u64,
}

impl Default for SpdGenParams {
    fn default() -> Self {
        Self { n: 500, density: 0.16, diag: 10.0, seed: 0 }
    }
}

/// Random sparse SPD matrix.
///
/// `M` has i.i.d. standard Gaussian off-diagonal entries, each present with
/// probability `density`; its diagonal is overwritten with `diag`; the
/// result is `M Mᵀ`, flagged SPD. Draw order is row-major over the
/// off-diagonal positions: one uniform for presence, then one Gaussian if
/// present.
pub fn gen_sparse_spd(params: &SpdGenParams) -> Result<CsrMatrix> {
    let SpdGenParams { n, density, diag, seed } = *params;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!("density {density} outside [0, 1]")));
    }
    if !diag.is_finite() {
        return Err(Error::InvalidParameter(format!("diagonal {diag} is not finite")));
    }
    let mut rng = rng::seeded(seed);
    let mut triplets = Vec::with_capacity(n + (density * (n * n) as f64) as usize);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                if diag != 0.0 {
                    triplets.push((i, i, diag));
                }
                continue;
            }
            let present: f64 = rng.random();
            if present < density {
                let v: f64 = rng.sample(StandardNormal);
                triplets.push((i, j, v));
            }
        }
    }
    let m = CsrMatrix::from_triplets(n, triplets)?;
    Ok(m.gram_outer().assume_spd())
}

/// Standard Gaussian vector of length `n` drawn from [`rng::seeded`].
pub fn gaussian_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::seeded(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}
