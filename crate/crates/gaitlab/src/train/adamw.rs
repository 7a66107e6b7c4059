//! AdamW: Adam moments with decoupled weight decay.
//!
//! Per tensor θ with gradient g at step t (1-based):
//!
//! ```text
//! m ← β₁·m + (1−β₁)·g
//! v ← β₂·v + (1−β₂)·g²
//! m̂ = m / (1 − β₁ᵗ),  v̂ = v / (1 − β₂ᵗ)
//! θ ← θ − lr · ( m̂ / (√v̂ + ε) + wd·θ )
//! ```
//!
//! Decay multiplies the *parameter*, not the gradient — it never passes
//! through the moment estimates.

use crate::error::{Error, Result};
use crate::nn::mat::Mat;
use crate::nn::model::{ModelParams, ParamGrads};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamWConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            learning_rate: 0.002,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamWConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Parameter("learning rate must be positive".into()));
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return Err(Error::Parameter("weight decay must be non-negative".into()));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 1)")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Parameter("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Optimizer state for one model's tensors (canonical order).
#[derive(Debug, Clone)]
pub struct AdamW {
    cfg: AdamWConfig,
    m: Vec<Mat>,
    v: Vec<Mat>,
    steps: u64,
}

impl AdamW {
    pub fn new(cfg: AdamWConfig, params: &ModelParams) -> Result<Self> {
        cfg.validate()?;
        let zeros: Vec<Mat> = params
            .tensors()
            .iter()
            .map(|(_, t)| Mat::zeros(t.rows(), t.cols()))
            .collect();
        Ok(AdamW {
            cfg,
            m: zeros.clone(),
            v: zeros,
            steps: 0,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update from accumulated gradients.
    pub fn step(&mut self, params: &mut ModelParams, grads: &ParamGrads) -> Result<()> {
        if grads.mats.len() != self.m.len() {
            return Err(Error::Contract(format!(
                "optimizer has {} tensors, gradients {}",
                self.m.len(),
                grads.mats.len()
            )));
        }
        self.steps += 1;
        let t = self.steps as i32;
        let bias1 = 1.0 - self.cfg.beta1.powi(t);
        let bias2 = 1.0 - self.cfg.beta2.powi(t);
        for ((slot, (name, theta)), (m, v)) in grads
            .mats
            .iter()
            .zip(params.tensors_mut())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if slot.shape() != theta.shape() {
                return Err(Error::Contract(format!(
                    "gradient for {name:?} has shape {:?}, parameter {:?}",
                    slot.shape(),
                    theta.shape()
                )));
            }
            let (b1, b2) = (self.cfg.beta1, self.cfg.beta2);
            for i in 0..theta.len() {
                let g = slot.data()[i];
                let mi = b1 * m.data()[i] + (1.0 - b1) * g;
                let vi = b2 * v.data()[i] + (1.0 - b2) * g * g;
                m.data_mut()[i] = mi;
                v.data_mut()[i] = vi;
                let m_hat = mi / bias1;
                let v_hat = vi / bias2;
                let theta_i = theta.data()[i];
                theta.data_mut()[i] = theta_i
                    - self.cfg.learning_rate
                        * (m_hat / (v_hat.sqrt() + self.cfg.epsilon)
                            + self.cfg.weight_decay * theta_i);
            }
            if !theta.is_finite() {
                return Err(Error::Numerical(format!(
                    "parameter {name:?} became non-finite during optimization"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn tiny_params(value: f64) -> ModelParams {
        let mut p = ModelParams::init(1, 1, 0).unwrap();
        for (_, t) in p.tensors_mut() {
            for v in t.data_mut() {
                *v = value;
            }
        }
        p
    }

    fn grads_of(params: &ModelParams, value: f64) -> ParamGrads {
        let mut g = ParamGrads::zeros_like(params);
        for m in &mut g.mats {
            for v in m.data_mut() {
                *v = value;
            }
        }
        g
    }

    #[test]
    fn first_step_matches_frozen_value() {
        // θ=1, g=1, defaults ⇒ θ′ = 1 − 0.002·(1/(1+1e−8) + 0.01)
        let mut params = tiny_params(1.0);
        let grads = grads_of(&params, 1.0);
        let mut opt = AdamW::new(AdamWConfig::default(), &params).unwrap();
        opt.step(&mut params, &grads).unwrap();
        for (_, t) in params.tensors() {
            for v in t.data() {
                assert!(
                    (v - 0.997_980).abs() < 1e-9,
                    "first AdamW step produced {v}"
                );
            }
        }
    }

    /// Independent scalar re-implementation used as a trajectory oracle.
    struct ScalarAdamW {
        m: f64,
        v: f64,
        t: u32,
    }

    impl ScalarAdamW {
        fn step(&mut self, theta: f64, g: f64, cfg: &AdamWConfig) -> f64 {
            self.t += 1;
            self.m = cfg.beta1 * self.m + (1.0 - cfg.beta1) * g;
            self.v = cfg.beta2 * self.v + (1.0 - cfg.beta2) * g * g;
            let m_hat = self.m / (1.0 - cfg.beta1.powi(self.t as i32));
            let v_hat = self.v / (1.0 - cfg.beta2.powi(self.t as i32));
            theta
                - cfg.learning_rate * (m_hat / (v_hat.sqrt() + cfg.epsilon) + cfg.weight_decay * theta)
        }
    }

    #[test]
    fn ten_step_trajectories_match_scalar_oracle() {
        let mut rng = crate::seed::rng_from_seed(31);
        for _ in 0..50 {
            let cfg = AdamWConfig {
                learning_rate: rng.gen::<f64>() * 0.01 + 1e-4,
                weight_decay: rng.gen::<f64>() * 0.1,
                beta1: rng.gen::<f64>() * 0.95,
                beta2: 0.9 + rng.gen::<f64>() * 0.0999,
                epsilon: 1e-8,
            };
            let theta0: f64 = rng.gen::<f64>() * 4.0 - 2.0;
            let gs: Vec<f64> = (0..10).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();

            let mut params = tiny_params(theta0);
            let mut opt = AdamW::new(cfg.clone(), &params).unwrap();
            let mut oracle = ScalarAdamW { m: 0.0, v: 0.0, t: 0 };
            let mut theta_ref = theta0;
            for g in gs {
                let grads = grads_of(&params, g);
                opt.step(&mut params, &grads).unwrap();
                theta_ref = oracle.step(theta_ref, g, &cfg);
                let got = params.gcn_w.get(0, 0);
                assert!(
                    (got - theta_ref).abs() <= 1e-12,
                    "{got} vs oracle {theta_ref}"
                );
            }
        }
    }

    #[test]
    fn zero_gradient_still_decays_weights() {
        let mut params = tiny_params(1.0);
        let grads = grads_of(&params, 0.0);
        let mut opt = AdamW::new(AdamWConfig::default(), &params).unwrap();
        opt.step(&mut params, &grads).unwrap();
        let got = params.gcn_w.get(0, 0);
        // Pure decay: θ − lr·wd·θ
        assert!((got - (1.0 - 0.002 * 0.01)).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_hyperparameters() {
        let params = tiny_params(0.0);
        for cfg in [
            AdamWConfig { learning_rate: 0.0, ..Default::default() },
            AdamWConfig { weight_decay: -0.1, ..Default::default() },
            AdamWConfig { beta1: 1.0, ..Default::default() },
            AdamWConfig { epsilon: 0.0, ..Default::default() },
        ] {
            assert!(AdamW::new(cfg, &params).is_err());
        }
    }
}
