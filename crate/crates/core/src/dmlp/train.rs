use serde::{Deserialize, Serialize};

use super::{bce_loss, AdamConfig, AdamState, BackwardWork, ForwardCache, MlpModel, Reduction};
use crate::dataset::{FeatureScaler, Sample};
use crate::error::{Error, Result};
use crate::numerics::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation improvement of at least `min_delta`
    /// before stopping.
    pub patience: usize,
    pub min_delta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub init_seed: u64,
    pub loss_reduction: Reduction,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 256,
            max_epochs: 200,
            patience: 10,
            min_delta: 1e-5,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            init_seed: 6,
            loss_reduction: Reduction::Mean,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config(
                "learning_rate",
                "must be a finite non-negative number",
            ));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return Err(Error::config("beta1", "must lie in (0, 1)"));
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::config("beta2", "must lie in (0, 1)"));
        }
        if self.patience == 0 {
            return Err(Error::config("patience", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

/// Standardized inputs and 0/1 targets as dense row-major matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    inputs: Vec<f64>,
    labels: Vec<f64>,
    input_dim: usize,
    output_dim: usize,
}

impl TrainingSet {
    pub fn new(
        inputs: Vec<f64>,
        labels: Vec<f64>,
        input_dim: usize,
        output_dim: usize,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || !inputs.len().is_multiple_of(input_dim) {
            return Err(Error::Shape(
                "inputs do not tile the input dimension".into(),
            ));
        }
        if labels.len() != inputs.len() / input_dim * output_dim {
            return Err(Error::Shape(format!(
                "{} labels for {} rows of {output_dim} outputs",
                labels.len(),
                inputs.len() / input_dim
            )));
        }
        Ok(Self {
            inputs,
            labels,
            input_dim,
            output_dim,
        })
    }

    /// Applies `scaler` to every sample's features.
    pub fn from_samples<'a>(
        samples: impl IntoIterator<Item = &'a Sample>,
        scaler: &FeatureScaler,
    ) -> Result<Self> {
        let d = scaler.len();
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        let mut k = None;
        for s in samples {
            if s.features.len() != d {
                return Err(Error::Shape(format!(
                    "sample has {} features, scaler {d}",
                    s.features.len()
                )));
            }
            if *k.get_or_insert(s.labels.len()) != s.labels.len() {
                return Err(Error::Shape("samples disagree on label count".into()));
            }
            let start = inputs.len();
            inputs.extend(s.features.iter().map(|&v| f64::from(v)));
            scaler.apply_in_place(&mut inputs[start..]);
            labels.extend(s.labels.iter().map(|&b| if b { 1.0 } else { 0.0 }));
        }
        Self::new(inputs, labels, d, k.unwrap_or(1))
    }

    pub fn rows(&self) -> usize {
        self.inputs.len() / self.input_dim
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Mean per-sample loss of `model` on this set.
    pub fn mean_loss(&self, model: &MlpModel) -> f64 {
        let mut cache = ForwardCache::default();
        let mut total = 0.0;
        const CHUNK: usize = 1024;
        for start in (0..self.rows()).step_by(CHUNK) {
            let end = (start + CHUNK).min(self.rows());
            model.forward_batch(
                &self.inputs[start * self.input_dim..end * self.input_dim],
                end - start,
                &mut cache,
            );
            total += bce_loss(
                cache.output(),
                &self.labels[start * self.output_dim..end * self.output_dim],
                self.output_dim,
                Reduction::Sum,
            );
        }
        total / self.rows().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-sample loss over the epoch's mini-batches.
    pub train_loss: f64,
    /// Mean per-sample loss on the validation set (the training set when no
    /// validation set is given).
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Snapshot with the lowest validation loss, rounded to single precision.
    pub model: MlpModel,
    pub trace: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

impl TrainOutcome {
    /// `epoch,train_loss,val_loss` CSV.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for s in &self.trace {
            out.push_str(&format!("{},{},{}\n", s.epoch, s.train_loss, s.val_loss));
        }
        out
    }
}

/// Mini-batch Adam with per-epoch shuffling and early stopping on the
/// validation loss.
pub fn train(
    mut model: MlpModel,
    train_set: &TrainingSet,
    val_set: Option<&TrainingSet>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (d, k) = (model.arch.input_dim, model.arch.output_dim);
    for set in std::iter::once(train_set).chain(val_set) {
        if set.input_dim != d || set.output_dim != k {
            return Err(Error::Shape(format!(
                "data is {}->{}, model is {d}->{k}",
                set.input_dim, set.output_dim
            )));
        }
    }
    if train_set.is_empty() {
        return Err(Error::Domain("empty training set".into()));
    }
    let val_set = val_set.filter(|v| !v.is_empty());
    let adam = cfg.adam();
    let mut state = AdamState::new(&model);
    let mut grads = model.gradients();
    let mut cache = ForwardCache::default();
    let mut work = BackwardWork::default();
    let shuffle_root = SeededRng::new(cfg.init_seed).split("shuffle");

    let rows = train_set.rows();
    let mut order: Vec<usize> = (0..rows).collect();
    let mut batch_x = Vec::with_capacity(cfg.batch_size * d);
    let mut batch_y = Vec::with_capacity(cfg.batch_size * k);

    let mut trace = Vec::new();
    let mut best: Option<(MlpModel, f64, usize)> = None;
    let mut stale = 0;

    for epoch in 1..=cfg.max_epochs {
        order.sort_unstable();
        shuffle_root
            .split_indexed("epoch", epoch as u64)
            .shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            batch_x.clear();
            batch_y.clear();
            for &i in idx {
                batch_x.extend_from_slice(&train_set.inputs[i * d..(i + 1) * d]);
                batch_y.extend_from_slice(&train_set.labels[i * k..(i + 1) * k]);
            }
            model.forward_batch(&batch_x, idx.len(), &mut cache);
            let loss = bce_loss(cache.output(), &batch_y, k, Reduction::Sum);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, batch: b });
            }
            epoch_loss += loss;
            let scale = match cfg.loss_reduction {
                Reduction::Sum => 1.0,
                Reduction::Mean => 1.0 / idx.len() as f64,
            };
            model.backward(&cache, &batch_y, scale, &mut grads, &mut work);
            state.step(&mut model, &grads, &adam);
        }
        if !model.is_finite() {
            return Err(Error::Divergence {
                epoch,
                batch: rows.div_ceil(cfg.batch_size),
            });
        }
        let train_loss = epoch_loss / rows as f64;
        let val_loss = match val_set {
            Some(v) => v.mean_loss(&model),
            None => train_loss,
        };
        if !val_loss.is_finite() {
            return Err(Error::Divergence { epoch, batch: 0 });
        }
        trace.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });
        log::info!("epoch {epoch}: train {train_loss:.5} val {val_loss:.5}");

        let improved = best
            .as_ref()
            .is_none_or(|(_, b, _)| val_loss < b - cfg.min_delta);
        if improved {
            best = Some((model.clone(), val_loss, epoch));
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    let (mut model, best_val_loss, best_epoch) = best.expect("at least one epoch");
    model.round_to_single();
    Ok(TrainOutcome {
        model,
        trace,
        best_epoch,
        best_val_loss,
    })
}
