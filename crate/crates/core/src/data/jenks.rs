//! Jenks natural breaks: exact optimal 1-D classification.

use crate::error::{Error, Result};

/// Distinct sorted values with multiplicities, shifted by the mean to limit
/// cancellation in the prefix-sum variance formula.
struct Weighted {
    values: Vec<f64>,
    /// Prefix sums over distinct values: count, sum, sum of squares.
    w: Vec<f64>,
    s: Vec<f64>,
    ss: Vec<f64>,
}

impl Weighted {
    fn new(raw: &[f64]) -> Self {
        let mut sorted = raw.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
        let mut values: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for x in sorted {
            if values.last() == Some(&x) {
                *counts.last_mut().unwrap() += 1.0;
            } else {
                values.push(x);
                counts.push(1.0);
            }
        }
        let (mut w, mut s, mut ss) = (vec![0.0], vec![0.0], vec![0.0]);
        for (x, c) in values.iter().zip(&counts) {
            let y = x - mean;
            w.push(w.last().unwrap() + c);
            s.push(s.last().unwrap() + c * y);
            ss.push(ss.last().unwrap() + c * y * y);
        }
        Self { values, w, s, ss }
    }

    /// Within-class sum of squared deviations of distinct values `i..j`.
    fn sse(&self, i: usize, j: usize) -> f64 {
        let w = self.w[j] - self.w[i];
        let s = self.s[j] - self.s[i];
        (self.ss[j] - self.ss[i] - s * s / w).max(0.0)
    }
}

/// The `k - 1` thresholds of the optimal `k`-class partition: each is the
/// largest value of a lower class, so class `c` holds values in
/// `(t_{c-1}, t_c]`.
///
/// Minimizes the total within-class sum of squared deviations by dynamic
/// programming over the distinct values (equal values never straddle a
/// break). Ties between equally good partitions go to the earliest last
/// break.
pub fn jenks_breaks(values: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::Domain(format!("need at least two classes, got {k}")));
    }
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite value {x}")));
    }
    let data = Weighted::new(values);
    let n = data.values.len();
    if n < k {
        return Err(Error::Domain(format!(
            "{k} classes requested but only {n} distinct values"
        )));
    }
    // cost[c][j]: best cost of the first j distinct values in c + 1 classes
    let mut cost = vec![vec![f64::INFINITY; n + 1]; k];
    let mut split = vec![vec![0usize; n + 1]; k];
    for (j, slot) in cost[0].iter_mut().enumerate().skip(1) {
        *slot = data.sse(0, j);
    }
    for c in 1..k {
        for j in c + 1..=n {
            for i in c..j {
                let candidate = cost[c - 1][i] + data.sse(i, j);
                if candidate < cost[c][j] {
                    cost[c][j] = candidate;
                    split[c][j] = i;
                }
            }
        }
    }
    let mut breaks = vec![0.0; k - 1];
    let mut j = n;
    for c in (1..k).rev() {
        let i = split[c][j];
        breaks[c - 1] = data.values[i - 1];
        j = i;
    }
    Ok(breaks)
}

/// Total within-class sum of squared deviations for given thresholds.
pub fn within_class_sse(values: &[f64], breaks: &[f64]) -> f64 {
    let mut classes = vec![Vec::new(); breaks.len() + 1];
    for &x in values {
        let c = breaks.iter().take_while(|&&t| x > t).count();
        classes[c].push(x);
    }
    classes
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            let m = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        })
        .sum()
}

/// Number of values in each class.
pub fn class_counts(values: &[f64], breaks: &[f64]) -> Vec<usize> {
    let mut counts = vec![0; breaks.len() + 1];
    for &x in values {
        counts[breaks.iter().take_while(|&&t| x > t).count()] += 1;
    }
    counts
}
