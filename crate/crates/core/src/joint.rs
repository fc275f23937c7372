//! Joint cell probabilities of the two outcome blocks and the likelihood
//! loss.

use serde::{Deserialize, Serialize};

use crate::copula::{cdf_generic, rectangle_mass, validate_theta, CopulaFamily, CopulaSpec, RECT_TOLERANCE};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{BlockOutput, JointModel, PreparedModel};
use crate::scalar::Real;

/// Probabilities are floored here before taking logarithms.
pub const CELL_FLOOR: f64 = 1e-12;

/// Joint distribution over (first-block category, second-block category).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointCellMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub cells: Vec<f64>,
}

impl JointCellMatrix {
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.cells[i * self.cols + k]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Most probable cell; ties go to the lowest row-major index.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (idx, &c) in self.cells.iter().enumerate() {
            if c > self.cells[best] {
                best = idx;
            }
        }
        (best / self.cols, best % self.cols)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.cells.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|k| (0..self.rows).map(|i| self.get(i, k)).sum())
            .collect()
    }
}

fn check_cumulative(name: &str, cum: &[f64]) -> Result<()> {
    if cum.len() < 2 || cum[0] != 0.0 || *cum.last().unwrap() != 1.0 {
        return Err(Error::Domain(format!(
            "{name} must run from 0 to 1 (got {cum:?})"
        )));
    }
    if cum.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain(format!("{name} is not nondecreasing: {cum:?}")));
    }
    Ok(())
}

/// Cells of an ordinal–ordinal joint: copula masses of the rectangles cut out
/// by the two blocks' cumulative points.
pub fn ordinal_ordinal_cells(u_cum: &[f64], v_cum: &[f64], spec: &CopulaSpec) -> Result<JointCellMatrix> {
    check_cumulative("u_cum", u_cum)?;
    check_cumulative("v_cum", v_cum)?;
    let (rows, cols) = (u_cum.len() - 1, v_cum.len() - 1);
    let mut cells = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for k in 0..cols {
            cells.push(rectangle_mass(spec, u_cum[i], u_cum[i + 1], v_cum[k], v_cum[k + 1])?);
        }
    }
    Ok(JointCellMatrix { rows, cols, cells })
}

/// Cells of a multinomial–ordinal joint with one copula parameter per
/// alternative: `cell(j, r) = C_j(P_j, v_r) - C_j(P_j, v_{r-1})`, then
/// normalized to total one.
pub fn multinomial_ordinal_cells(
    mode_probs: &[f64],
    v_cum: &[f64],
    family: CopulaFamily,
    thetas: &[f64],
) -> Result<JointCellMatrix> {
    check_cumulative("v_cum", v_cum)?;
    let expected = if family.has_parameter() { mode_probs.len() } else { thetas.len() };
    if thetas.len() != expected {
        return Err(Error::Dimension(format!(
            "{} alternatives but {} copula parameters",
            mode_probs.len(),
            thetas.len()
        )));
    }
    if mode_probs.iter().any(|p| !(0.0..=1.0).contains(p)) || (mode_probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("mode probabilities {mode_probs:?} are not a distribution")));
    }
    for &t in thetas {
        validate_theta(family, t)?;
    }
    let theta_of = |j: usize| thetas.get(j).copied().unwrap_or(0.0);
    let (rows, cols) = (mode_probs.len(), v_cum.len() - 1);
    let mut cells = Vec::with_capacity(rows * cols);
    for (j, &p) in mode_probs.iter().enumerate() {
        for r in 0..cols {
            let c = cdf_generic(family, theta_of(j), p, v_cum[r + 1]) - cdf_generic(family, theta_of(j), p, v_cum[r]);
            if c < -RECT_TOLERANCE {
                return Err(Error::Consistency(format!(
                    "negative cell ({j}, {r}) = {c} for {family} theta = {}",
                    theta_of(j)
                )));
            }
            cells.push(c.max(0.0));
        }
    }
    let total: f64 = cells.iter().sum();
    for c in &mut cells {
        *c /= total;
    }
    Ok(JointCellMatrix { rows, cols, cells })
}

/// Probability of cell `(y1, y2)` given both blocks' outputs.
fn observed_cell<T: Real>(
    family: CopulaFamily,
    thetas: &[T],
    first: &BlockOutput<T>,
    second: &BlockOutput<T>,
    y1: usize,
    y2: usize,
) -> T {
    let BlockOutput::Cumulative(v) = second else {
        unreachable!("second block is ordinal by construction")
    };
    let theta = |j: usize| thetas.get(j).copied().unwrap_or(T::cst(0.0));
    match first {
        BlockOutput::Cumulative(u) => {
            let c = |a: T, b: T| cdf_generic(family, theta(0), a, b);
            c(u[y1 + 1], v[y2 + 1]) - c(u[y1 + 1], v[y2]) - c(u[y1], v[y2 + 1]) + c(u[y1], v[y2])
        }
        BlockOutput::Probabilities(p) => {
            let c = |a: T, b: T| cdf_generic(family, theta(y1), a, b);
            // the normalizer sum_j P_j is one up to rounding but is kept so
            // that the loss matches the reported cell matrix exactly
            let total = T::sum(p);
            (c(p[y1], v[y2 + 1]) - c(p[y1], v[y2])) / total
        }
    }
}

/// Sum of `ln max(cell, floor)` over `rows`, generic in the scalar type.
pub(crate) fn loglik_sum<T: Real>(model: &JointModel, prepared: &PreparedModel<T>, data: &Dataset, rows: &[usize]) -> T {
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    let mut terms = Vec::with_capacity(rows.len());
    for &row in rows {
        model.gather(data, row, &mut xa, &mut xb);
        let first = prepared.first.evaluate(&xa);
        let second = prepared.second.evaluate(&xb);
        let cell = observed_cell(model.family(), &prepared.thetas, &first, &second, data.first[row], data.second[row]);
        terms.push(if cell.val() < CELL_FLOOR { T::cst(CELL_FLOOR.ln()) } else { cell.ln() });
    }
    T::sum(&terms)
}

fn check_rows(data: &Dataset, rows: &[usize]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Domain("negative log-likelihood of an empty dataset".into()));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= data.len()) {
        return Err(Error::Dimension(format!("row {bad} out of range for {} rows", data.len())));
    }
    Ok(())
}

fn check_outcomes(model: &JointModel, data: &Dataset) -> Result<()> {
    if data.first_categories != model.first_categories() || data.second_categories != model.second_categories() {
        return Err(Error::Dimension(format!(
            "dataset has {}x{} outcome categories, model expects {}x{}",
            data.first_categories,
            data.second_categories,
            model.first_categories(),
            model.second_categories()
        )));
    }
    Ok(())
}

/// Mean negative log-likelihood over the given rows.
pub fn joint_nll_rows(model: &JointModel, params: &[f64], data: &Dataset, rows: &[usize]) -> Result<f64> {
    check_rows(data, rows)?;
    check_outcomes(model, data)?;
    let prepared = model.prepare(params);
    Ok(-loglik_sum(model, &prepared, data, rows) / rows.len() as f64)
}

/// Mean negative log-likelihood over the whole dataset.
pub fn joint_nll(model: &JointModel, params: &[f64], data: &Dataset) -> Result<f64> {
    let rows: Vec<usize> = (0..data.len()).collect();
    joint_nll_rows(model, params, data, &rows)
}

/// Mean negative log-likelihood over `rows` and its exact gradient.
pub fn joint_nll_gradient(model: &JointModel, params: &[f64], data: &Dataset, rows: &[usize]) -> Result<(f64, Vec<f64>)> {
    check_rows(data, rows)?;
    check_outcomes(model, data)?;
    let n = rows.len() as f64;
    crate::autodiff::gradient(params, |p| {
        let prepared = model.prepare(p);
        -loglik_sum(model, &prepared, data, rows) / n
    })
    .map_err(|e| match e {
        Error::Numerical(msg) => {
            let idx = msg.rsplit(' ').next().and_then(|s| s.parse::<usize>().ok());
            match idx {
                Some(i) => Error::Numerical(format!("non-finite gradient for {}", model.layout.describe(i))),
                None => Error::Numerical(msg),
            }
        }
        other => other,
    })
}

impl JointModel {
    /// Full joint cell matrix for one observation.
    pub fn cell_matrix(&self, params: &[f64], data: &Dataset, row: usize) -> Result<JointCellMatrix> {
        let (first, second) = self.marginals(params, data, row);
        let BlockOutput::Cumulative(v) = second else {
            unreachable!("second block is ordinal by construction")
        };
        let thetas = self.thetas(params);
        match first {
            BlockOutput::Cumulative(u) => {
                let spec = CopulaSpec::new(self.family(), thetas.first().copied().unwrap_or(0.0))?;
                ordinal_ordinal_cells(&u, &v, &spec)
            }
            BlockOutput::Probabilities(p) => multinomial_ordinal_cells(&p, &v, self.family(), &thetas),
        }
    }

    /// Per-observation log-likelihood contributions (floored).
    pub fn loglik_terms(&self, params: &[f64], data: &Dataset) -> Result<Vec<f64>> {
        check_outcomes(self, data)?;
        let prepared = self.prepare(params);
        Ok((0..data.len())
            .map(|row| loglik_sum(self, &prepared, data, &[row]))
            .collect())
    }
}
