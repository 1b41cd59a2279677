use serde::{Deserialize, Serialize};

use super::{Gradients, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment accumulators, flattened in parameter order
/// (per layer: weights, then bias).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        let n = model.param_count();
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    /// One bias-corrected Adam update; advances the step counter first, so
    /// the first call uses `t = 1`.
    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients, cfg: &AdamConfig) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        let mut i = 0;
        for (layer, g) in model.layers.iter_mut().zip(&grads.layers) {
            let params = layer.weights.iter_mut().chain(layer.bias.iter_mut());
            let grad = g.weights.iter().chain(&g.bias);
            for (p, &gi) in params.zip(grad) {
                let m = &mut self.m[i];
                let v = &mut self.v[i];
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * gi;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * gi * gi;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
                i += 1;
            }
        }
    }
}

/// Single-parameter Adam update; returns the new value.
pub fn adam_scalar(
    theta: f64,
    grad: f64,
    m: &mut f64,
    v: &mut f64,
    t: i32,
    cfg: &AdamConfig,
) -> f64 {
    *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * grad;
    *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * grad * grad;
    let m_hat = *m / (1.0 - cfg.beta1.powi(t));
    let v_hat = *v / (1.0 - cfg.beta2.powi(t));
    theta - cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmlp::{MlpArchitecture, MlpModel};

    fn tiny() -> MlpModel {
        let mut m = MlpModel::zeros(MlpArchitecture {
            input_dim: 2,
            hidden_layers: 1,
            hidden_width: 2,
            output_dim: 1,
        });
        m.layers[0].weights = vec![0.1, -0.2, 0.3, 0.4];
        m
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_gradient_sign() {
        let cfg = AdamConfig::default();
        let mut model = tiny();
        let before = model.clone();
        let mut grads = model.gradients();
        grads.layers[0].weights = vec![3.0, -0.02, 0.0, 1e3];
        let mut state = AdamState::new(&model);
        state.step(&mut model, &grads, &cfg);
        let w0 = &before.layers[0].weights;
        let w1 = &model.layers[0].weights;
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
        for (i, &g) in [3.0f64, -0.02, 0.0, 1e3].iter().enumerate() {
            let expect = -cfg.learning_rate * g / (g.abs() + cfg.epsilon);
            assert!((w1[i] - w0[i] - expect).abs() < 1e-15, "{i}");
            if g != 0.0 {
                assert!(((w1[i] - w0[i]).abs() - cfg.learning_rate).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let cfg = AdamConfig::default();
        let mut model = tiny();
        let before = model.clone();
        let grads = model.gradients();
        let mut state = AdamState::new(&model);
        for _ in 0..5 {
            state.step(&mut model, &grads, &cfg);
        }
        assert_eq!(model, before);
    }

    #[test]
    fn matches_scalar_reference() {
        let cfg = AdamConfig::default();
        let mut model = tiny();
        let mut state = AdamState::new(&model);
        let (mut theta, mut m, mut v) = (model.layers[0].weights[1], 0.0, 0.0);
        for t in 1..=20 {
            let g = (t as f64 * 0.37).sin();
            let mut grads = model.gradients();
            grads.layers[0].weights[1] = g;
            state.step(&mut model, &grads, &cfg);
            theta = adam_scalar(theta, g, &mut m, &mut v, t, &cfg);
            assert_eq!(model.layers[0].weights[1], theta);
        }
    }

    #[test]
    fn quadratic_descends_after_warmup() {
        // f(x) = (x - 3)^2 from x = -2.
        let cfg = AdamConfig {
            learning_rate: 0.01,
            ..AdamConfig::default()
        };
        let (mut x, mut m, mut v) = (-2.0f64, 0.0, 0.0);
        let mut losses = Vec::new();
        for t in 1..=500 {
            x = adam_scalar(x, 2.0 * (x - 3.0), &mut m, &mut v, t, &cfg);
            losses.push((x - 3.0).powi(2));
        }
        let warm = 10;
        for w in losses[warm..].windows(2).take(300) {
            assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
        }
        assert!(losses[499] < losses[0]);
    }
}
