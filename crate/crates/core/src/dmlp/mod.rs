//! Deep multilayer perceptron activity detector.
//!
//! `Z` ReLU hidden layers of width `V` map the `2NL` received-signal
//! features to `K` sigmoid outputs, one activity probability per device.
//! Parameters are kept in double precision while training; the model file
//! stores them in single precision.

mod adam;
mod io;
mod train;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureScaler;
use crate::error::{Error, Result};
use crate::numerics::SeededRng;

pub use adam::{adam_scalar, AdamConfig, AdamState};
pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use train::{train, EpochStats, TrainConfig, TrainOutcome, TrainingSet};

/// Probabilities are clipped to `[CLIP, 1 - CLIP]` inside the loss.
pub const PROB_CLIP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub output_dim: usize,
}

impl MlpArchitecture {
    /// Detector for `K` devices observing `L` pilot symbols on `N` antennas.
    pub fn for_system(
        num_users: usize,
        pilot_length: usize,
        antennas: usize,
        hidden_layers: usize,
        hidden_width: usize,
    ) -> Self {
        Self {
            input_dim: 2 * antennas * pilot_length,
            hidden_layers,
            hidden_width,
            output_dim: num_users,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::config(
                "architecture",
                "input and output dimensions must be positive",
            ));
        }
        if self.hidden_layers == 0 {
            return Err(Error::config(
                "hidden_layers",
                "need at least one hidden layer",
            ));
        }
        if self.hidden_width == 0 {
            return Err(Error::config(
                "hidden_width",
                "need at least one unit per hidden layer",
            ));
        }
        Ok(())
    }

    /// `(out, in)` of every dense layer, input side first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = vec![(self.hidden_width, self.input_dim)];
        for _ in 1..self.hidden_layers {
            shapes.push((self.hidden_width, self.hidden_width));
        }
        shapes.push((self.output_dim, self.hidden_width));
        shapes
    }

    /// `(Z - 1) V^2 + (2NL + K + Z) V + K`.
    pub fn parameter_count(&self) -> usize {
        let (z, v) = (self.hidden_layers, self.hidden_width);
        (z - 1) * v * v + (self.input_dim + self.output_dim + z) * v + self.output_dim
    }
}

pub fn parameter_count(arch: &MlpArchitecture) -> usize {
    arch.parameter_count()
}

/// Dense layer, weights `out x in` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; out_dim * in_dim],
            bias: vec![0.0; out_dim],
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub arch: MlpArchitecture,
    pub layers: Vec<Dense>,
    pub scaler: FeatureScaler,
}

/// Glorot-uniform weights, zero biases.
pub fn init_model(
    arch: MlpArchitecture,
    scaler: FeatureScaler,
    rng: &SeededRng,
) -> Result<MlpModel> {
    arch.validate()?;
    if scaler.len() != arch.input_dim {
        return Err(Error::Shape(format!(
            "scaler covers {} features, architecture expects {}",
            scaler.len(),
            arch.input_dim
        )));
    }
    let mut rng = rng.split("mlp-init");
    let layers = arch
        .layer_shapes()
        .into_iter()
        .map(|(out_dim, in_dim)| {
            let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
            let mut layer = Dense::zeros(out_dim, in_dim);
            for w in &mut layer.weights {
                *w = rng.uniform_range(-bound, bound);
            }
            layer
        })
        .collect();
    Ok(MlpModel {
        arch,
        layers,
        scaler,
    })
}

impl MlpModel {
    pub fn zeros(arch: MlpArchitecture) -> Self {
        let layers = arch
            .layer_shapes()
            .into_iter()
            .map(|(o, i)| Dense::zeros(o, i))
            .collect();
        Self {
            arch,
            layers,
            scaler: FeatureScaler::identity(arch.input_dim),
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    /// Rounds every parameter to the nearest `f32`, the precision of the
    /// model file.
    pub fn round_to_single(&mut self) {
        for layer in &mut self.layers {
            for p in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *p = f64::from(*p as f32);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|p| p.is_finite()))
    }

    /// Probabilities for one already-standardized feature vector.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.arch.input_dim {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.arch.input_dim,
                features.len()
            )));
        }
        let mut cache = ForwardCache::default();
        self.forward_batch(features, 1, &mut cache);
        Ok(cache.output().to_vec())
    }

    /// Probabilities for raw (unscaled) features.
    pub fn predict(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.arch.input_dim {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.arch.input_dim,
                raw.len()
            )));
        }
        self.forward(&self.scaler.apply(raw))
    }

    /// Probabilities for many raw feature rows (row-major, `rows x input_dim`).
    pub fn predict_rows(&self, raw_rows: &[f64]) -> Result<Vec<f64>> {
        let d = self.arch.input_dim;
        if !raw_rows.len().is_multiple_of(d) {
            return Err(Error::Shape(format!(
                "{} values are not a multiple of {d}",
                raw_rows.len()
            )));
        }
        let rows = raw_rows.len() / d;
        let mut out = Vec::with_capacity(rows * self.arch.output_dim);
        let mut cache = ForwardCache::default();
        const CHUNK: usize = 512;
        let mut scaled = Vec::with_capacity(CHUNK * d);
        for chunk in raw_rows.chunks(CHUNK * d) {
            scaled.clear();
            scaled.extend_from_slice(chunk);
            for row in scaled.chunks_mut(d) {
                self.scaler.apply_in_place(row);
            }
            self.forward_batch(&scaled, chunk.len() / d, &mut cache);
            out.extend_from_slice(cache.output());
        }
        Ok(out)
    }

    /// Batched forward pass over standardized inputs; fills `cache` with
    /// every layer's activations.
    pub fn forward_batch(&self, inputs: &[f64], batch: usize, cache: &mut ForwardCache) {
        debug_assert_eq!(inputs.len(), batch * self.arch.input_dim);
        cache.batch = batch;
        cache.activations.resize(self.layers.len() + 1, Vec::new());
        cache.activations[0].clear();
        cache.activations[0].extend_from_slice(inputs);
        let last = self.layers.len() - 1;
        for (t, layer) in self.layers.iter().enumerate() {
            let (prev, next) = cache.activations.split_at_mut(t + 1);
            let x = &prev[t];
            let z = &mut next[0];
            z.clear();
            z.resize(batch * layer.out_dim, 0.0);
            for row in z.chunks_exact_mut(layer.out_dim) {
                row.copy_from_slice(&layer.bias);
            }
            // Z (batch x out) += X (batch x in) * W^T (in x out)
            unsafe {
                matrixmultiply::dgemm(
                    batch,
                    layer.in_dim,
                    layer.out_dim,
                    1.0,
                    x.as_ptr(),
                    layer.in_dim as isize,
                    1,
                    layer.weights.as_ptr(),
                    1,
                    layer.in_dim as isize,
                    1.0,
                    z.as_mut_ptr(),
                    layer.out_dim as isize,
                    1,
                );
            }
            if t == last {
                z.iter_mut().for_each(|v| *v = sigmoid(*v));
            } else {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
    }

    /// Gradients of the clipped binary cross-entropy, summed over the batch
    /// and multiplied by `scale`, for the activations in `cache`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        labels: &[f64],
        scale: f64,
        grads: &mut Gradients,
        work: &mut BackwardWork,
    ) {
        let batch = cache.batch;
        let n_layers = self.layers.len();
        let probs = cache.output();
        debug_assert_eq!(labels.len(), probs.len());

        // d loss / d pre-activation of the sigmoid output.
        let delta = &mut work.delta;
        delta.clear();
        delta.extend(probs.iter().zip(labels).map(|(&p, &a)| {
            if (PROB_CLIP..=1.0 - PROB_CLIP).contains(&p) {
                scale * (p - a)
            } else {
                0.0
            }
        }));

        for t in (0..n_layers).rev() {
            let layer = &self.layers[t];
            let x = &cache.activations[t];
            let g = &mut grads.layers[t];
            // dW (out x in) = delta^T (out x batch) * X (batch x in)
            unsafe {
                matrixmultiply::dgemm(
                    layer.out_dim,
                    batch,
                    layer.in_dim,
                    1.0,
                    delta.as_ptr(),
                    1,
                    layer.out_dim as isize,
                    x.as_ptr(),
                    layer.in_dim as isize,
                    1,
                    0.0,
                    g.weights.as_mut_ptr(),
                    layer.in_dim as isize,
                    1,
                );
            }
            g.bias.iter_mut().for_each(|b| *b = 0.0);
            for row in delta.chunks_exact(layer.out_dim) {
                for (b, d) in g.bias.iter_mut().zip(row) {
                    *b += d;
                }
            }
            if t == 0 {
                break;
            }
            // delta_prev (batch x in) = delta (batch x out) * W (out x in), masked by ReLU'.
            let prev = &mut work.delta_prev;
            prev.clear();
            prev.resize(batch * layer.in_dim, 0.0);
            unsafe {
                matrixmultiply::dgemm(
                    batch,
                    layer.out_dim,
                    layer.in_dim,
                    1.0,
                    delta.as_ptr(),
                    layer.out_dim as isize,
                    1,
                    layer.weights.as_ptr(),
                    layer.in_dim as isize,
                    1,
                    0.0,
                    prev.as_mut_ptr(),
                    layer.in_dim as isize,
                    1,
                );
            }
            for (d, &a) in prev.iter_mut().zip(x) {
                if a <= 0.0 {
                    *d = 0.0;
                }
            }
            std::mem::swap(delta, prev);
        }
    }

    /// Zero-initialized gradient buffers shaped like this model.
    pub fn gradients(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.out_dim, l.in_dim))
                .collect(),
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn relu(z: f64) -> f64 {
    z.max(0.0)
}

/// Per-layer activations of the last forward pass; index 0 is the input.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    batch: usize,
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

#[derive(Debug, Clone, Default)]
pub struct BackwardWork {
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

/// Gradients with the same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Sum,
    Mean,
}

/// Binary cross-entropy over a batch of `K`-wide rows; probabilities are
/// clipped to `[1e-7, 1 - 1e-7]`. `Sum` adds over samples, `Mean` divides
/// by the number of samples.
pub fn bce_loss(
    predicted: &[f64],
    labels: &[f64],
    num_outputs: usize,
    reduction: Reduction,
) -> f64 {
    assert_eq!(
        predicted.len(),
        labels.len(),
        "prediction/label length mismatch"
    );
    assert!(num_outputs > 0 && predicted.len().is_multiple_of(num_outputs));
    let total: f64 = predicted
        .iter()
        .zip(labels)
        .map(|(&p, &a)| {
            let c = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            -(a * c.ln() + (1.0 - a) * (1.0 - c).ln())
        })
        .sum();
    match reduction {
        Reduction::Sum => total,
        Reduction::Mean => total / (predicted.len() / num_outputs) as f64,
    }
}
