//! Random search over depth, learning rate and batch size.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{train, FittedModel, TrainConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{Backbone, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub depths: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub depth: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// `None` when training failed.
    pub validation_nll: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_config: TrainConfig,
    pub best: FittedModel,
    pub trials: Vec<Trial>,
}

/// Samples `budget` configurations from the grid, without replacement while
/// unsampled ones remain, and keeps the one with the lowest validation NLL.
/// Depth is ignored for a Logit backbone. Failed trials are recorded and
/// skipped.
pub fn random_search(
    spec: &ModelSpec,
    data: &Dataset,
    space: &SearchSpace,
    budget: usize,
    base: &TrainConfig,
    seed: u64,
) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::Domain("search budget must be at least 1".into()));
    }
    let depths = match spec.backbone {
        Backbone::Logit => vec![0],
        Backbone::ResLogit { .. } => space.depths.clone(),
    };
    if depths.is_empty() || space.learning_rates.is_empty() || space.batch_sizes.is_empty() {
        return Err(Error::Domain("every search dimension needs at least one candidate".into()));
    }
    let mut grid = Vec::new();
    for &d in &depths {
        for &lr in &space.learning_rates {
            for &b in &space.batch_sizes {
                grid.push((d, lr, b));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grid.shuffle(&mut rng);
    let mut picks: Vec<(usize, f64, usize)> = grid.iter().copied().take(budget).collect();
    while picks.len() < budget {
        picks.push(*grid.choose(&mut rng).expect("grid is nonempty"));
    }

    let mut trials = Vec::with_capacity(budget);
    let mut best: Option<(TrainConfig, FittedModel)> = None;
    for (depth, learning_rate, batch_size) in picks {
        let cfg = TrainConfig {
            depth: matches!(spec.backbone, Backbone::ResLogit { .. }).then_some(depth),
            learning_rate,
            batch_size,
            ..base.clone()
        };
        let mut trial = Trial {
            depth,
            learning_rate,
            batch_size,
            validation_nll: None,
            error: None,
        };
        match train(spec, data, &cfg) {
            Ok(fit) => {
                trial.validation_nll = Some(fit.best_validation_nll);
                if best.as_ref().is_none_or(|(_, b)| fit.best_validation_nll < b.best_validation_nll) {
                    best = Some((cfg, fit));
                }
            }
            Err(e) => trial.error = Some(e.to_string()),
        }
        trials.push(trial);
    }
    let (best_config, best) = best.ok_or_else(|| {
        Error::Training {
            epoch: 0,
            message: "every search trial failed".into(),
        }
    })?;
    Ok(SearchResult {
        best_config,
        best,
        trials,
    })
}
