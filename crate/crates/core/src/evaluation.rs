//! Model-selection metrics and comparison tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::copula::CopulaFamily;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimation::reparam::{diagnose, ThetaDiagnostic};
use crate::model::{BlockKind, JointModel, ParameterSet};

/// `-2 LL + 2B` with `LL` the signed total log-likelihood.
pub fn aic(total_loglik: f64, n_params: usize) -> f64 {
    -2.0 * total_loglik + 2.0 * n_params as f64
}

/// Predicted joint cell (argmax, ties to the lowest index) per observation.
pub fn predict_cells(model: &JointModel, params: &[f64], data: &Dataset) -> Result<Vec<(usize, usize)>> {
    (0..data.len())
        .map(|row| Ok(model.cell_matrix(params, data, row)?.argmax()))
        .collect()
}

/// Share of predicted joint cells that differ from the observed ones.
pub fn mpe_from_predictions(observed: &[(usize, usize)], predicted: &[(usize, usize)]) -> Result<f64> {
    if observed.is_empty() || observed.len() != predicted.len() {
        return Err(Error::Dimension(format!(
            "{} observations, {} predictions",
            observed.len(),
            predicted.len()
        )));
    }
    let wrong = observed.iter().zip(predicted).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / observed.len() as f64)
}

pub fn mpe(model: &JointModel, params: &[f64], data: &Dataset) -> Result<f64> {
    let observed: Vec<(usize, usize)> = data.first.iter().copied().zip(data.second.iter().copied()).collect();
    mpe_from_predictions(&observed, &predict_cells(model, params, data)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// e.g. `"Frank-ResLogit(M=16)"`.
    pub label: String,
    pub family: CopulaFamily,
    pub total_loglik: f64,
    pub n_params: usize,
    pub aic: f64,
    pub mpe: f64,
    pub mean_nll: f64,
    /// Copula parameters; `[0.0]` for Product.
    pub theta: Vec<f64>,
    pub diagnostics: Vec<ThetaDiagnostic>,
    pub n_obs: usize,
    pub notes: Vec<String>,
}

impl FitReport {
    /// Metrics of `params` on `data`.
    pub fn compute(model: &JointModel, params: &ParameterSet, data: &Dataset) -> Result<Self> {
        model.check_params(params)?;
        if data.is_empty() {
            return Err(Error::Domain("cannot evaluate on an empty dataset".into()));
        }
        let terms = model.loglik_terms(&params.values, data)?;
        let total_loglik: f64 = terms.iter().sum();
        let n_params = model.n_params();
        let eta = &params.values[model.eta_range()];
        let family = model.family();
        let (theta, diagnostics) = if family.has_parameter() {
            (
                model.thetas(&params.values),
                eta.iter().map(|&e| diagnose(family, e)).collect(),
            )
        } else {
            (vec![0.0], vec![ThetaDiagnostic::IndependenceLimit])
        };
        let mut notes = vec!["standard errors unavailable".to_string()];
        if matches!(model.spec.first.kind, BlockKind::Multinomial { .. }) && family.has_parameter() {
            notes.push("alternative-wise copula cells renormalized to sum to one".into());
        }
        Ok(Self {
            label: model.spec.label(),
            family,
            total_loglik,
            n_params,
            aic: aic(total_loglik, n_params),
            mpe: mpe(model, &params.values, data)?,
            mean_nll: -total_loglik / data.len() as f64,
            theta,
            diagnostics,
            n_obs: data.len(),
            notes,
        })
    }

    pub fn saturated(&self) -> bool {
        self.diagnostics.contains(&ThetaDiagnostic::Saturated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub rank: usize,
    pub best: bool,
    pub flags: Vec<String>,
    pub report: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

/// Ranks reports by AIC (ascending, stable for ties).
pub fn compare(reports: &[FitReport]) -> Result<Comparison> {
    if reports.is_empty() {
        return Err(Error::Domain("nothing to compare".into()));
    }
    let mut sorted: Vec<FitReport> = reports.to_vec();
    sorted.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    let rows = sorted
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut flags = Vec::new();
            if r.saturated() {
                flags.push("theta outside range".to_string());
            }
            if sorted.iter().enumerate().any(|(j, o)| j != i && o.aic == r.aic) {
                flags.push("tied AIC".to_string());
            }
            ComparisonRow {
                rank: i + 1,
                best: i == 0,
                flags,
                report: r.clone(),
            }
        })
        .collect();
    Ok(Comparison { rows })
}

impl Comparison {
    pub fn best(&self) -> &FitReport {
        &self.rows[0].report
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned plain-text table: model, LL, parameters, AIC, MPE, theta.
    pub fn to_text(&self) -> String {
        let theta_text = |r: &FitReport| {
            if r.family == CopulaFamily::Product || r.theta.is_empty() {
                "-".to_string()
            } else {
                let parts: Vec<String> = r.theta.iter().map(|t| format!("{t:.3}")).collect();
                if parts.len() == 1 {
                    parts[0].clone()
                } else {
                    format!("({})", parts.join(", "))
                }
            }
        };
        let header = ["Model", "LL", "Parameters", "AIC", "MPE", "theta", "Notes"];
        let body: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|row| {
                let r = &row.report;
                let mut notes = row.flags.clone();
                if row.best {
                    notes.insert(0, "best".into());
                }
                [
                    r.label.clone(),
                    format!("{:.3}", r.total_loglik),
                    r.n_params.to_string(),
                    format!("{:.2}", r.aic),
                    format!("{:.4}", r.mpe),
                    theta_text(r),
                    notes.join("; "),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[&str]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 || i == 6 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
        for row in &body {
            let cells: Vec<&str> = row.iter().map(String::as_str).collect();
            line(&mut out, &cells);
        }
        out
    }
}
