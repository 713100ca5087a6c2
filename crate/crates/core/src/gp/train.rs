use super::{exact_mll_and_grad, stochastic_grad, GpDataset, GpHyperparams, GradSolver, ProbeSet, StochasticOptions};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: [f64; 3],
    v: [f64; 3],
    t: i32,
}

impl Default for Adam {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, m: [0.0; 3], v: [0.0; 3], t: 0 }
    }
}

impl Adam {
    pub fn step(&mut self, params: &mut [f64; 3], grad: &[f64; 3], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..3 {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub lr: f64,
    /// Steps at which the learning rate is multiplied by `decay`.
    pub milestones: Vec<usize>,
    pub decay: f64,
    pub solver: GradSolver,
    pub probes: usize,
    /// Start the `y` solves from the previous step's unweighted solution.
    pub warm_start: bool,
    pub init: GpHyperparams,
    pub seed: u64,
    pub stochastic: StochasticOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 100,
            lr: 0.01,
            milestones: vec![55, 90],
            decay: 0.3,
            solver: GradSolver::Cholesky,
            probes: 30,
            warm_start: true,
            init: GpHyperparams { log_gamma: 0.0, log_l: 0.0, log_sigma2: 0.0 },
            seed: 0,
            stochastic: StochasticOptions::default(),
        }
    }
}

impl TrainConfig {
    pub fn learning_rate(&self, step: usize) -> f64 {
        let drops = self.milestones.iter().filter(|&&m| m <= step).count();
        self.lr * self.decay.powi(drops as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    /// Exact loss at the parameters the step starts from.
    pub loss: f64,
    pub params: GpHyperparams,
    pub avg_solver_iters: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// Why training stopped early, if it did.
    pub aborted: Option<String>,
}

/// Adam on the log-hyperparameters. The monitored loss is always exact;
/// only the gradients go through `config.solver`. Probes are redrawn every
/// step.
pub fn train(data: &GpDataset, config: &TrainConfig) -> Result<Trace> {
    if !(config.lr > 0.0) || config.probes == 0 {
        return Err(Error::InvalidParameter("learning rate and probe count must be positive".into()));
    }
    let mut rng = seeded(config.seed);
    let mut adam = Adam::default();
    let mut params = config.init.to_array();
    let mut warm: Option<Vec<f64>> = None;
    let mut rows = Vec::with_capacity(config.steps);
    for step in 0..config.steps {
        let current = GpHyperparams::from_array(params);
        let loss = match exact_mll_and_grad(&current, data) {
            Ok(e) => e.loss,
            Err(e) if e.is_numerical() => return Ok(Trace { rows, aborted: Some(e.to_string()) }),
            Err(e) => return Err(e),
        };
        let probes = ProbeSet::rademacher(config.probes, data.len(), &mut rng);
        let sample = stochastic_grad(
            &current,
            data,
            &probes,
            config.solver,
            &config.stochastic,
            warm.as_deref().filter(|_| config.warm_start),
            &mut rng,
        );
        let sample = match sample {
            Ok(s) => s,
            Err(e) if e.is_numerical() => return Ok(Trace { rows, aborted: Some(e.to_string()) }),
            Err(e) => return Err(e),
        };
        rows.push(TraceRow { step, loss, params: current, avg_solver_iters: sample.avg_solver_iters });
        if !loss.is_finite() || sample.grad.iter().any(|g| !g.is_finite()) {
            return Ok(Trace { rows, aborted: Some(format!("non-finite loss or gradient at step {step}")) });
        }
        adam.step(&mut params, &sample.grad, config.learning_rate(step));
        warm = Some(sample.warm_start);
    }
    Ok(Trace { rows, aborted: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut adam = Adam::default();
        let mut p = [0.3, -1.0, 2.0];
        for _ in 0..5 {
            adam.step(&mut p, &[0.0; 3], 0.1);
        }
        assert_eq!(p, [0.3, -1.0, 2.0]);
    }

    #[test]
    fn first_adam_step_moves_by_the_learning_rate() {
        let mut adam = Adam::default();
        let mut p = [0.0; 3];
        adam.step(&mut p, &[2.0, -0.5, 1e-3], 0.01);
        for (v, s) in p.iter().zip([-1.0, 1.0, -1.0]) {
            assert!((v - s * 0.01).abs() < 1e-6);
        }
    }

    #[test]
    fn schedule_drops_at_milestones() {
        let c = TrainConfig::default();
        assert_eq!(c.learning_rate(54), 0.01);
        assert!((c.learning_rate(55) - 0.003).abs() < 1e-15);
        assert!((c.learning_rate(90) - 0.0009).abs() < 1e-15);
    }

    #[test]
    fn zero_steps_give_an_empty_trace() {
        let truth = GpHyperparams::new(1.0, 0.5, 0.1).unwrap();
        let d = GpDataset::synthetic(10, 2, &truth, 1).unwrap();
        let t = train(&d, &TrainConfig { steps: 0, ..Default::default() }).unwrap();
        assert!(t.rows.is_empty() && t.aborted.is_none());
    }
}
