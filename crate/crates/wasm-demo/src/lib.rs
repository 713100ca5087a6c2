//! Browser bindings: AS and RR truncation schedules of a generated SPD
//! system and their exact cost/error trade-off curves.

use as_krylov::driver::{Experiment, Problem};
use as_krylov::krylov::Method;
use as_krylov::linop::{gaussian_vector, gen_sparse_spd, CsrMatrix, SpdGenParams};
use as_krylov::truncation::{schedule_from_stream, AsConfig, Estimator, RrConfig};
use wasm_bindgen::prelude::*;

/// A generated system `A x = b` and its deterministic CG improvements.
#[wasm_bindgen]
pub struct Demo {
    matrix: CsrMatrix,
    rhs: Vec<f64>,
    improvements: Vec<f64>,
}

impl Demo {
    pub fn build(n: usize, density: f64, diag: f64, seed: u64) -> Result<Demo, String> {
        if n > 400 {
            return Err("n is capped at 400 in the browser".into());
        }
        let matrix = gen_sparse_spd(&SpdGenParams { n, density, diag, seed }).map_err(|e| e.to_string())?;
        let rhs = gaussian_vector(n, seed.wrapping_add(1));
        let improvements = {
            let exp = Experiment::new(Problem::new(&matrix, rhs.clone(), Method::Cg)).map_err(|e| e.to_string())?;
            if !exp.converged() {
                return Err(format!("CG did not converge in {} iterations", exp.iterations()));
            }
            exp.improvements().to_vec()
        };
        Ok(Demo { matrix, rhs, improvements })
    }

    fn estimator_schedule(&self, est: &Estimator) -> Result<Vec<f64>, String> {
        schedule_from_stream(&self.improvements, est).map(|s| s.probs().to_vec()).map_err(|e| e.to_string())
    }

    pub fn as_probs(&self, eta: f64) -> Result<Vec<f64>, String> {
        self.estimator_schedule(&Estimator::As(AsConfig::new(eta).map_err(|e| e.to_string())?))
    }

    pub fn rr_probs(&self, min_iters: usize, lambda: f64) -> Result<Vec<f64>, String> {
        self.estimator_schedule(&Estimator::Rr(RrConfig::new(min_iters, lambda).map_err(|e| e.to_string())?))
    }

    /// `[cost_0, error_0, cost_1, error_1, ...]`: exact expected iterations
    /// and expected squared energy error for every estimator.
    pub fn curve(&self, estimators: &[Estimator]) -> Result<Vec<f64>, String> {
        let exp = Experiment::new(Problem::new(&self.matrix, self.rhs.clone(), Method::Cg)).map_err(|e| e.to_string())?;
        let mut out = Vec::with_capacity(2 * estimators.len());
        for e in estimators {
            let s = exp.exact_statistics(e).map_err(|e| e.to_string())?;
            out.push(s.expected_cost);
            out.push(s.expected_metric);
        }
        Ok(out)
    }

    /// Exact AS curve over `points` values of `η` spread over `(-1, K)`.
    pub fn as_curve_points(&self, points: usize) -> Result<Vec<f64>, String> {
        let k = self.improvements.len() as f64;
        let grid = (0..points)
            .map(|i| AsConfig::new(-0.99 + (k - 0.01) * i as f64 / points.max(2).saturating_sub(1) as f64).map(Estimator::As))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        self.curve(&grid)
    }

    /// Exact RR curve at rate `lambda`, guaranteed iterations `0..K`.
    pub fn rr_curve_points(&self, lambda: f64, points: usize) -> Result<Vec<f64>, String> {
        let k = self.improvements.len();
        let step = (k / points.max(1)).max(1);
        let grid = (0..k)
            .step_by(step)
            .map(|m| RrConfig::new(m, lambda).map(Estimator::Rr))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        self.curve(&grid)
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, density: f64, diag: f64, seed: u32) -> Result<Demo, JsError> {
        Demo::build(n, density, diag, seed as u64).map_err(|e| JsError::new(&e))
    }

    pub fn iterations(&self) -> usize {
        self.improvements.len()
    }

    pub fn improvements(&self) -> Vec<f64> {
        self.improvements.clone()
    }

    /// `P(j)` for `j = 0..=K` under AS with parameter `eta`.
    pub fn as_schedule(&self, eta: f64) -> Result<Vec<f64>, JsError> {
        self.as_probs(eta).map_err(|e| JsError::new(&e))
    }

    /// `P(j)` for `j = 0..=K` under RR.
    pub fn rr_schedule(&self, min_iters: usize, lambda: f64) -> Result<Vec<f64>, JsError> {
        self.rr_probs(min_iters, lambda).map_err(|e| JsError::new(&e))
    }

    pub fn as_curve(&self, points: usize) -> Result<Vec<f64>, JsError> {
        self.as_curve_points(points).map_err(|e| JsError::new(&e))
    }

    pub fn rr_curve(&self, lambda: f64, points: usize) -> Result<Vec<f64>, JsError> {
        self.rr_curve_points(lambda, points).map_err(|e| JsError::new(&e))
    }
}
