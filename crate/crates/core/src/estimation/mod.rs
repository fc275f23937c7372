//! Parameter estimation: RMSprop mini-batch descent with early stopping and
//! random hyperparameter search.

pub mod reparam;
mod search;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use search::{random_search, SearchResult, SearchSpace, Trial};

use crate::data::{stratified_split, Dataset};
use crate::error::{Error, Result};
use crate::joint::{joint_nll_gradient, joint_nll_rows};
use crate::model::{Backbone, JointModel, ModelSpec, ParameterSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Epochs without an improvement larger than `min_delta` before stopping.
    pub patience: usize,
    pub min_delta: f64,
    /// Overrides the residual depth of a ResLogit backbone when set.
    pub depth: Option<usize>,
    pub seed: u64,
    pub split_ratio: f64,
    /// Fixed reduction order. Training is single-threaded, so this always
    /// holds; the flag is kept for configuration compatibility.
    pub deterministic: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            learning_rate: 1e-3,
            max_epochs: 200,
            patience: 10,
            min_delta: 1e-6,
            depth: None,
            seed: 0,
            split_ratio: 0.7,
            deterministic: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Domain("batch_size must be at least 1".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Domain(format!("split_ratio {} outside (0, 1)", self.split_ratio)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Domain(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        if self.max_epochs == 0 {
            return Err(Error::Domain("max_epochs must be at least 1".into()));
        }
        Ok(())
    }

    /// The spec with this config's depth override applied.
    pub fn apply_depth(&self, spec: &ModelSpec) -> ModelSpec {
        match (spec.backbone, self.depth) {
            (Backbone::ResLogit { .. }, Some(depth)) => spec.with_backbone(Backbone::ResLogit { depth }),
            _ => spec.clone(),
        }
    }
}

/// RMSprop: `s <- 0.9 s + 0.1 g^2`, `p <- p - lr g / sqrt(s + 1e-8)`.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    pub accumulator: Vec<f64>,
}

impl RmsProp {
    pub fn new(n: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            decay: 0.9,
            epsilon: 1e-8,
            accumulator: vec![0.0; n],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), grad.len(), "parameter and gradient lengths differ");
        assert_eq!(params.len(), self.accumulator.len(), "optimizer state length differs");
        for ((p, &g), s) in params.iter_mut().zip(grad).zip(&mut self.accumulator) {
            *s = self.decay * *s + (1.0 - self.decay) * g * g;
            *p -= self.learning_rate * g / (*s + self.epsilon).sqrt();
        }
    }
}

/// Result of [`train`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ModelSpec,
    /// Parameters at the best validation epoch.
    pub params: ParameterSet,
    pub config: TrainConfig,
    /// Mean training NLL per epoch, averaged over the epoch's mini-batches.
    pub train_trace: Vec<f64>,
    pub validation_trace: Vec<f64>,
    pub epochs: usize,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_validation_nll: f64,
    pub n_params: usize,
    pub n_train: usize,
    pub n_validation: usize,
    pub warnings: Vec<String>,
}

impl FittedModel {
    pub fn model(&self, columns: &[String]) -> Result<JointModel> {
        JointModel::new(self.spec.clone(), columns)
    }
}

/// Fits `spec` to `data`.
///
/// The data is split by [`stratified_split`] with the config's seed; each
/// epoch visits the shuffled training rows in mini-batches, then scores the
/// validation rows. The parameters with the lowest validation NLL seen are
/// returned.
pub fn train(spec: &ModelSpec, data: &Dataset, cfg: &TrainConfig) -> Result<FittedModel> {
    let init = |model: &JointModel, train_data: &Dataset| model.initial_params(Some(train_data)).values;
    train_from(spec, data, cfg, init)
}

/// Like [`train`] with caller-chosen starting values.
pub fn train_with_start(spec: &ModelSpec, data: &Dataset, cfg: &TrainConfig, start: &ParameterSet) -> Result<FittedModel> {
    train_from(spec, data, cfg, |model, _| {
        if model.check_params(start).is_ok() {
            start.values.clone()
        } else {
            model.initial_params(None).values
        }
    })
}

fn train_from(
    spec: &ModelSpec,
    data: &Dataset,
    cfg: &TrainConfig,
    init: impl FnOnce(&JointModel, &Dataset) -> Vec<f64>,
) -> Result<FittedModel> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Domain("cannot train on an empty dataset".into()));
    }
    let spec = cfg.apply_depth(spec);
    let model = JointModel::new(spec.clone(), &data.columns)?;
    let split = stratified_split(data, cfg.split_ratio, cfg.seed)?;
    let mut warnings = split.warnings.clone();
    let mut train_rows = split.train;
    let validation_rows = if split.validation.is_empty() {
        warnings.push("validation split is empty; early stopping monitors the training rows".into());
        train_rows.clone()
    } else {
        split.validation
    };

    let mut params = init(&model, &data.subset(&train_rows));
    let mut optimizer = RmsProp::new(params.len(), cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed));

    let mut best_params = params.clone();
    let mut best_val = joint_nll_rows(&model, &params, data, &validation_rows)?;
    let mut reference = best_val;
    let mut best_epoch = 0;
    let mut since = 0;
    let mut train_trace = Vec::new();
    let mut validation_trace = Vec::new();
    let mut epochs = 0;

    for epoch in 1..=cfg.max_epochs {
        epochs = epoch;
        train_rows.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in train_rows.chunks(cfg.batch_size) {
            let (loss, grad) = joint_nll_gradient(&model, &params, data, batch).map_err(|e| Error::Training {
                epoch,
                message: format!("{e}; last finite validation NLL {best_val}"),
            })?;
            if !loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    message: format!("non-finite batch NLL; last finite validation NLL {best_val}"),
                });
            }
            total += loss * batch.len() as f64;
            optimizer.step(&mut params, &grad);
        }
        train_trace.push(total / train_rows.len() as f64);
        let val = joint_nll_rows(&model, &params, data, &validation_rows)?;
        if !val.is_finite() {
            return Err(Error::Training {
                epoch,
                message: format!("non-finite validation NLL; last finite value {best_val}"),
            });
        }
        validation_trace.push(val);
        if val < best_val {
            best_val = val;
            best_params.clone_from(&params);
            best_epoch = epoch;
        }
        if val < reference - cfg.min_delta {
            reference = val;
            since = 0;
        } else {
            since += 1;
            if since >= cfg.patience {
                break;
            }
        }
    }

    Ok(FittedModel {
        params: ParameterSet::new(model.layout.clone(), best_params)?,
        n_params: model.n_params(),
        spec,
        config: cfg.clone(),
        train_trace,
        validation_trace,
        epochs,
        best_epoch,
        best_validation_nll: best_val,
        n_train: train_rows.len(),
        n_validation: validation_rows.len(),
        warnings,
    })
}
