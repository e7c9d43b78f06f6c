use serde::{Deserialize, Serialize};

use super::{Gradients, Network};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected Adam moments for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(net: &Network, config: AdamConfig) -> Self {
        let shapes: Vec<usize> = net.params().iter().map(|p| p.len()).collect();
        AdamState {
            config,
            first: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, net: &mut Network, grads: &Gradients) -> Result<()> {
        let grad_slices = grads.param_slices();
        let mut params = net.params_mut();
        if grad_slices.len() != params.len() || params.len() != self.first.len() {
            return Err(Error::Shape(format!(
                "{} parameter tensors, {} gradient tensors, {} optimizer slots",
                params.len(),
                grad_slices.len(),
                self.first.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(&grad_slices).zip(&self.first) {
            if p.len() != g.len() || p.len() != m.len() {
                return Err(Error::Shape("parameter and gradient tensor sizes differ".into()));
            }
        }

        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(&grad_slices)
            .zip(self.first.iter_mut())
            .zip(self.second.iter_mut())
        {
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::nn::{init_network, LayerGrad, LayerSpec};

    fn net() -> Network {
        init_network(
            &[
                LayerSpec::Linear { input: 3, output: 2 },
                LayerSpec::BatchNorm { dim: 2 },
                LayerSpec::Relu,
            ],
            3,
        )
        .unwrap()
    }

    fn constant_grads(v: f64) -> Gradients {
        Gradients {
            layers: vec![
                LayerGrad::Linear {
                    weight: DenseMatrix::from_vec(3, 2, vec![v; 6]).unwrap(),
                    bias: vec![v; 2],
                },
                LayerGrad::BatchNorm {
                    gamma: vec![v; 2],
                    beta: vec![v; 2],
                },
                LayerGrad::None,
            ],
            input: DenseMatrix::zeros(1, 3),
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut n = net();
        let before = n.clone();
        let mut adam = AdamState::new(&n, AdamConfig::default());
        adam.step(&mut n, &constant_grads(0.0)).unwrap();
        assert_eq!(n, before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut n = net();
        let before: Vec<Vec<f64>> = n.params().iter().map(|p| p.to_vec()).collect();
        let mut adam = AdamState::new(&n, AdamConfig::default());
        adam.step(&mut n, &constant_grads(0.37)).unwrap();
        for (after, before) in n.params().iter().zip(&before) {
            for (a, b) in after.iter().zip(before) {
                let moved = b - a;
                assert!((moved - 2e-4).abs() < 1e-10, "{moved}");
            }
        }
    }

    #[test]
    fn updates_are_deterministic() {
        let run = || {
            let mut n = net();
            let mut adam = AdamState::new(&n, AdamConfig::default());
            for k in 0..5 {
                adam.step(&mut n, &constant_grads(0.1 * k as f64 - 0.2)).unwrap();
            }
            n
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mismatched_gradients_are_rejected() {
        let mut n = net();
        let mut adam = AdamState::new(&n, AdamConfig::default());
        let mut g = constant_grads(1.0);
        g.layers.pop();
        g.layers.pop();
        assert!(adam.step(&mut n, &g).is_err());
    }
}
