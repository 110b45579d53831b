//! Adam optimizer over the flat parameter vector, with the standard
//! bias-corrected first and second moment estimates.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> AdamConfig {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Adam {
    config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Adam {
    pub fn new(config: AdamConfig, param_len: usize) -> Adam {
        Adam {
            config,
            m: alloc::vec![0.0; param_len],
            v: alloc::vec![0.0; param_len],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u32 {
        self.t
    }

    /// One update in place. `grad` must match the parameter length.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let c = &self.config;
        let bias1 = 1.0 - crate::fmath::powf(c.beta1, self.t as f64);
        let bias2 = 1.0 - crate::fmath::powf(c.beta2, self.t as f64);
        for i in 0..params.len() {
            self.m[i] = c.beta1 * self.m[i] + (1.0 - c.beta1) * grad[i];
            self.v[i] = c.beta2 * self.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            params[i] -= c.learning_rate * m_hat / (crate::fmath::sqrt(v_hat) + c.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate_against_the_gradient() {
        // With bias correction, step one reduces to
        // lr * g / (|g| + eps) ~= lr * sign(g).
        let mut params = alloc::vec![1.0, -2.0];
        let mut adam = Adam::new(AdamConfig::default(), 2);
        adam.step(&mut params, &[0.5, -0.25]);
        assert!((params[0] - (1.0 - 1e-3)).abs() < 1e-9);
        assert!((params[1] - (-2.0 + 1e-3)).abs() < 1e-9);
    }

    #[test]
    fn converges_on_a_quadratic() {
        // Minimize (x - 3)^2 from 0.
        let mut params = alloc::vec![0.0];
        let mut adam = Adam::new(
            AdamConfig {
                learning_rate: 0.05,
                ..AdamConfig::default()
            },
            1,
        );
        for _ in 0..2000 {
            let g = 2.0 * (params[0] - 3.0);
            adam.step(&mut params, &[g]);
        }
        assert!((params[0] - 3.0).abs() < 1e-3, "got {}", params[0]);
    }

    #[test]
    fn zero_learning_rate_leaves_parameters_unchanged() {
        let mut params = alloc::vec![1.0, 2.0, 3.0];
        let snapshot = params.clone();
        let mut adam = Adam::new(
            AdamConfig {
                learning_rate: 0.0,
                ..AdamConfig::default()
            },
            3,
        );
        adam.step(&mut params, &[10.0, -4.0, 0.5]);
        assert_eq!(params, snapshot);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = alloc::vec![1.0, 2.0];
        let snapshot = params.clone();
        let mut adam = Adam::new(AdamConfig::default(), 2);
        adam.step(&mut params, &[0.0, 0.0]);
        assert_eq!(params, snapshot);
    }
}
