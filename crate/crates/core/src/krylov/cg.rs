use super::{validate_system, IterationRecord, KrylovIteration, SolverOptions, BREAKDOWN};
use crate::error::{Error, Result};
use crate::linop::{dot, residual, LinearOperator};

/// Conjugate gradients for SPD systems.
pub struct Cg<'a, A: LinearOperator + ?Sized> {
    op: &'a A,
    b: &'a [f64],
    x: Vec<f64>,
    r: Vec<f64>,
    p: Vec<f64>,
    ap: Vec<f64>,
    rr: f64,
    iter: usize,
    opts: SolverOptions,
}

impl<'a, A: LinearOperator + ?Sized> Cg<'a, A> {
    pub fn new(op: &'a A, b: &'a [f64], x0: &[f64], opts: SolverOptions) -> Result<Self> {
        validate_system(op, b, x0)?;
        if !op.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !op.is_spd() {
            return Err(Error::InvalidParameter("CG requires an operator flagged SPD".into()));
        }
        let r = residual(op, b, x0)?;
        let rr = dot(&r, &r);
        Ok(Self {
            op,
            b,
            x: x0.to_vec(),
            p: r.clone(),
            ap: vec![0.0; r.len()],
            r,
            rr,
            iter: 0,
            opts,
        })
    }

    pub fn search_direction(&self) -> &[f64] {
        &self.p
    }
}

impl<A: LinearOperator + ?Sized> KrylovIteration for Cg<'_, A> {
    fn step(&mut self) -> Result<IterationRecord> {
        if self.rr == 0.0 {
            return Err(Error::Breakdown { iteration: self.iter, reason: "residual is already zero" });
        }
        self.op.apply(&self.p, &mut self.ap);
        let pap = dot(&self.p, &self.ap);
        if !(pap > BREAKDOWN) {
            return Err(Error::NotSpd(pap, self.iter));
        }
        let alpha = self.rr / pap;
        let delta_x: Vec<f64> = self.p.iter().map(|pi| alpha * pi).collect();
        for (xi, di) in self.x.iter_mut().zip(&delta_x) {
            *xi += di;
        }
        let improvement = alpha * self.rr;
        self.iter += 1;
        match self.opts.recompute_every {
            Some(k) if k > 0 && self.iter % k == 0 => self.r = residual(self.op, self.b, &self.x)?,
            _ => {
                for (ri, api) in self.r.iter_mut().zip(&self.ap) {
                    *ri -= alpha * api;
                }
            }
        }
        let rr_new = dot(&self.r, &self.r);
        let beta = rr_new / self.rr;
        for (pi, ri) in self.p.iter_mut().zip(&self.r) {
            *pi = ri + beta * *pi;
        }
        self.rr = rr_new;
        Ok(IterationRecord {
            index: self.iter - 1,
            alpha: Some(alpha),
            q_norm_sq: Some(pap),
            improvement,
            delta_x,
            residual_norm: rr_new.sqrt(),
            exact: rr_new == 0.0,
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
