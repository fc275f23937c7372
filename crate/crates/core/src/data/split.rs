//! Training/validation split stratified by joint outcome cell.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// Row indices, ascending.
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Splits every joint cell separately. A cell with `n >= 2` rows sends
/// `round(ratio * n)` rows, clamped to `1..=n-1`, to training; a cell with a
/// single row sends it to training and records a warning.
pub fn stratified_split(data: &Dataset, ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Domain(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); data.first_categories * data.second_categories];
    for (row, cell) in data.joint_cells().into_iter().enumerate() {
        strata[cell].push(row);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split {
        train: Vec::new(),
        validation: Vec::new(),
        warnings: Vec::new(),
    };
    for (cell, mut rows) in strata.into_iter().enumerate() {
        let n = rows.len();
        match n {
            0 => {}
            1 => {
                split.train.push(rows[0]);
                split.warnings.push(format!(
                    "joint cell ({}, {}) has a single observation; kept in training",
                    cell / data.second_categories,
                    cell % data.second_categories
                ));
            }
            _ => {
                rows.shuffle(&mut rng);
                let n_train = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
                split.train.extend_from_slice(&rows[..n_train]);
                split.validation.extend_from_slice(&rows[n_train..]);
            }
        }
    }
    split.train.sort_unstable();
    split.validation.sort_unstable();
    Ok(split)
}
