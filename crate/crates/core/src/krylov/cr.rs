use super::{validate_system, IterationRecord, KrylovIteration, SolverOptions, BREAKDOWN};
use crate::error::{Error, Result};
use crate::linop::{dot, residual, LinearOperator};

/// Conjugate residuals for symmetric (possibly indefinite) systems.
///
/// Keeps `A r` and `A p` in step so each iteration costs one product.
/// Indefinite operators are accepted but can break down when `(r, A r)`
/// vanishes.
pub struct Cr<'a, A: LinearOperator + ?Sized> {
    op: &'a A,
    b: &'a [f64],
    x: Vec<f64>,
    r: Vec<f64>,
    p: Vec<f64>,
    ar: Vec<f64>,
    ap: Vec<f64>,
    rar: f64,
    rr: f64,
    iter: usize,
    opts: SolverOptions,
}

impl<'a, A: LinearOperator + ?Sized> Cr<'a, A> {
    pub fn new(op: &'a A, b: &'a [f64], x0: &[f64], opts: SolverOptions) -> Result<Self> {
        validate_system(op, b, x0)?;
        if !op.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let r = residual(op, b, x0)?;
        let mut ar = vec![0.0; r.len()];
        op.apply(&r, &mut ar);
        let rar = dot(&r, &ar);
        let rr = dot(&r, &r);
        Ok(Self {
            op,
            b,
            x: x0.to_vec(),
            p: r.clone(),
            ap: ar.clone(),
            r,
            ar,
            rar,
            rr,
            iter: 0,
            opts,
        })
    }
}

impl<A: LinearOperator + ?Sized> KrylovIteration for Cr<'_, A> {
    fn step(&mut self) -> Result<IterationRecord> {
        let iteration = self.iter;
        if self.rr == 0.0 {
            return Err(Error::Breakdown { iteration, reason: "residual is already zero" });
        }
        let app = dot(&self.ap, &self.ap);
        if !(app > BREAKDOWN) {
            return Err(Error::Breakdown { iteration, reason: "A p vanished" });
        }
        if !(self.rar.abs() > BREAKDOWN) {
            return Err(Error::Breakdown { iteration, reason: "(r, A r) vanished" });
        }
        let alpha = self.rar / app;
        let delta_x: Vec<f64> = self.p.iter().map(|pi| alpha * pi).collect();
        for (xi, di) in self.x.iter_mut().zip(&delta_x) {
            *xi += di;
        }
        self.iter += 1;
        match self.opts.recompute_every {
            Some(k) if k > 0 && self.iter % k == 0 => self.r = residual(self.op, self.b, &self.x)?,
            _ => {
                for (ri, api) in self.r.iter_mut().zip(&self.ap) {
                    *ri -= alpha * api;
                }
            }
        }
        self.op.apply(&self.r, &mut self.ar);
        let rar_new = dot(&self.r, &self.ar);
        let beta = rar_new / self.rar;
        for (pi, ri) in self.p.iter_mut().zip(&self.r) {
            *pi = ri + beta * *pi;
        }
        for (api, ari) in self.ap.iter_mut().zip(&self.ar) {
            *api = ari + beta * *api;
        }
        self.rar = rar_new;
        self.rr = dot(&self.r, &self.r);
        Ok(IterationRecord {
            index: iteration,
            alpha: Some(alpha),
            q_norm_sq: Some(app),
            improvement: alpha * alpha * app,
            delta_x,
            residual_norm: self.rr.sqrt(),
            exact: self.rr == 0.0,
        })
    }

    fn solution(&self) -> &[f64] {
        &self.x
    }

    fn residual_norm(&self) -> f64 {
        self.rr.sqrt()
    }

    fn iterations(&self) -> usize {
        self.iter
    }

    fn exhausted(&self) -> bool {
        self.rr == 0.0
    }
}
