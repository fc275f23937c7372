//! Command implementations. Each returns the text printed on success.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use copjoint_core::data::{
    class_counts, jenks_breaks, load_csv, read_numeric_column, simulate, stratified_split, Dataset,
};
use copjoint_core::data::SyntheticTruth;
use copjoint_core::estimation::{random_search, train, Trial};
use copjoint_core::evaluation::{compare, FitReport};
use copjoint_core::{FittedModel, JointModel, ModelSpec, ParameterSet};
use serde::{Deserialize, Serialize};

use crate::config::{EvalSplit, RunConfig};
use crate::error::{CliError, Result};

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Write {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(copjoint_core::Error::from)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Directory name for one fitted model, e.g. `frank-reslogit-m16`.
pub fn model_dir_name(spec: &ModelSpec) -> String {
    match spec.backbone.depth() {
        0 if spec.backbone == copjoint_core::Backbone::Logit => format!("{}-logit", spec.family.name()),
        m => format!("{}-reslogit-m{m}", spec.family.name()),
    }
}

fn trace_csv(fit: &FittedModel) -> String {
    let mut s = String::from("epoch,train_nll,validation_nll\n");
    for (i, (t, v)) in fit.train_trace.iter().zip(&fit.validation_trace).enumerate() {
        let _ = writeln!(s, "{},{t},{v}", i + 1);
    }
    s
}

#[derive(Serialize)]
struct Failure {
    model: String,
    error: String,
}

#[derive(Serialize)]
struct LoadLog<'a> {
    rows: usize,
    rejected: &'a [copjoint_core::data::RejectedRow],
    first_labels: &'a [String],
    second_labels: &'a [String],
}

fn load(cfg: &RunConfig, spec: &ModelSpec, out: &Path) -> Result<Dataset> {
    let loaded = load_csv(cfg.data_path()?, spec)?;
    let d = &loaded.dataset;
    write_json(
        &out.join("ingest.json"),
        &LoadLog {
            rows: d.len(),
            rejected: &loaded.rejected,
            first_labels: &d.first_labels,
            second_labels: &d.second_labels,
        },
    )?;
    Ok(loaded.dataset)
}

fn fit_one(cfg: &RunConfig, spec: &ModelSpec, data: &Dataset) -> Result<(FittedModel, Option<Vec<Trial>>)> {
    match &cfg.search {
        Some(s) => {
            let res = random_search(spec, data, &s.space, s.budget, &cfg.train, cfg.train.seed)?;
            Ok((res.best, Some(res.trials)))
        }
        None => Ok((train(spec, data, &cfg.train)?, None)),
    }
}

/// Fits one family, or all of them, and ranks the fits by AIC.
pub fn fit(cfg: &RunConfig) -> Result<String> {
    let model_cfg = cfg.model()?;
    let families = model_cfg.families()?;
    let out = cfg.out_dir();
    let data = load(cfg, &model_cfg.spec(families[0])?, &out)?;

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &family in &families {
        let spec = model_cfg.spec(family)?;
        let (fitted, trials) = match fit_one(cfg, &spec, &data) {
            Ok(f) => f,
            // with several families, one diverging fit should not sink the rest
            Err(e) if families.len() > 1 => {
                failures.push(Failure {
                    model: cfg.train.apply_depth(&spec).label(),
                    error: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let model = fitted.model(&data.columns)?;
        let report = FitReport::compute(&model, &fitted.params, &data)?;
        let dir = out.join(model_dir_name(&fitted.spec));
        write_json(&dir.join("params.json"), &fitted)?;
        write_json(&dir.join("report.json"), &report)?;
        write_file(&dir.join("trace.csv"), trace_csv(&fitted).as_bytes())?;
        if let Some(trials) = trials {
            write_json(&dir.join("search.json"), &trials)?;
        }
        reports.push(report);
    }
    if reports.is_empty() {
        let msg = failures.iter().map(|f| format!("{}: {}", f.model, f.error)).collect::<Vec<_>>();
        return Err(copjoint_core::Error::Training {
            epoch: 0,
            message: format!("every fit failed ({})", msg.join("; ")),
        }
        .into());
    }
    if !failures.is_empty() {
        write_json(&out.join("failures.json"), &failures)?;
    }
    let cmp = compare(&reports)?;
    write_file(&out.join("comparison.json"), (cmp.to_json()? + "\n").as_bytes())?;
    let text = cmp.to_text();
    write_file(&out.join("comparison.txt"), text.as_bytes())?;
    let mut summary = text;
    for f in &failures {
        let _ = writeln!(summary, "skipped {}: {}", f.model, f.error);
    }
    Ok(summary)
}

/// Draws a synthetic dataset from the configured truth.
pub fn simulate_cmd(cfg: &RunConfig) -> Result<String> {
    let sim = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [simulate] section with the generating truth".into()))?;
    let model_cfg = cfg.model()?;
    let spec = cfg.train.apply_depth(&model_cfg.spec(model_cfg.single_family()?)?);
    let mut truth = SyntheticTruth::new(spec.clone(), sim.covariates.clone(), cfg.seed.unwrap_or(0))?;
    for (name, values) in &sim.truth {
        truth.set(name, values)?;
    }
    let mut data = simulate(&truth, sim.n)?.dataset;
    if let Some(labels) = &spec.first.labels {
        data.first_labels = labels.clone();
    }
    if let Some(labels) = &spec.second.labels {
        data.second_labels = labels.clone();
    }
    let out = cfg.out_dir();
    let mut csv = Vec::new();
    data.write_csv(&mut csv, &spec.first.outcome, &spec.second.outcome)?;
    write_file(&out.join("data.csv"), &csv)?;
    write_json(&out.join("truth.json"), &truth)?;
    Ok(format!(
        "simulated {} rows from {} (seed {})\n",
        data.len(),
        spec.label(),
        truth.seed
    ))
}

#[derive(Deserialize)]
struct ParamsFile {
    params: ParameterSet,
}

/// Recomputes the fit metrics of stored parameters on a dataset split.
pub fn eval(cfg: &RunConfig) -> Result<String> {
    let e = cfg
        .eval
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [eval] section".into()))?;
    let model_cfg = cfg.model()?;
    let spec = cfg.train.apply_depth(&model_cfg.spec(model_cfg.single_family()?)?);
    let out = cfg.out_dir();
    let data = load(cfg, &spec, &out)?;
    let data = match e.split {
        EvalSplit::All => data,
        split => {
            let parts = stratified_split(&data, cfg.train.split_ratio, cfg.train.seed)?;
            let rows = if split == EvalSplit::Train { parts.train } else { parts.validation };
            data.subset(&rows)
        }
    };
    let file: ParamsFile = read_json(&e.params)?;
    let model = JointModel::new(spec, &data.columns)?;
    let report = FitReport::compute(&model, &file.params, &data)?;
    write_json(&out.join("eval_report.json"), &report)?;
    Ok(compare(&[report])?.to_text())
}

/// Ranks stored fit reports by AIC.
pub fn compare_cmd(cfg: &RunConfig) -> Result<String> {
    let c = cfg
        .compare
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [compare] section".into()))?;
    let reports = c.reports.iter().map(|p| read_json::<FitReport>(p)).collect::<Result<Vec<_>>>()?;
    let cmp = compare(&reports)?;
    let out = cfg.out_dir();
    write_file(&out.join("comparison.json"), (cmp.to_json()? + "\n").as_bytes())?;
    let text = cmp.to_text();
    write_file(&out.join("comparison.txt"), text.as_bytes())?;
    Ok(text)
}

#[derive(Serialize)]
struct Breaks<'a> {
    column: &'a str,
    k: usize,
    thresholds: Vec<f64>,
    class_counts: Vec<usize>,
}

/// Natural-breaks thresholds of one numeric column.
pub fn breaks(cfg: &RunConfig) -> Result<String> {
    let b = cfg
        .breaks
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [breaks] section".into()))?;
    let values = read_numeric_column(cfg.data_path()?, &b.column)?;
    let thresholds = jenks_breaks(&values, b.k)?;
    let result = Breaks {
        column: &b.column,
        k: b.k,
        class_counts: class_counts(&values, &thresholds),
        thresholds,
    };
    write_json(&cfg.out_dir().join("breaks.json"), &result)?;
    let mut text = String::new();
    for (i, t) in result.thresholds.iter().enumerate() {
        let _ = writeln!(text, "break {}: {t}", i + 1);
    }
    let counts: Vec<String> = result.class_counts.iter().map(usize::to_string).collect();
    let _ = writeln!(text, "class counts: {}", counts.join(", "));
    Ok(text)
}
