//! The TOML run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use copjoint_core::data::Covariate;
use copjoint_core::estimation::SearchSpace;
use copjoint_core::{Backbone, BlockSpec, CopulaFamily, ModelSpec, TrainConfig};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub deterministic: bool,
    pub out: Option<PathBuf>,
    /// Input CSV for `fit`, `eval` and `breaks`.
    pub data: Option<PathBuf>,
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub train: TrainConfig,
    pub search: Option<SearchConfig>,
    pub simulate: Option<SimulateConfig>,
    pub eval: Option<EvalConfig>,
    pub compare: Option<CompareConfig>,
    pub breaks: Option<BreaksConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub first: BlockSpec,
    pub second: BlockSpec,
    #[serde(default = "logit")]
    pub backbone: Backbone,
    /// A family name or `"all"`.
    pub family: String,
    #[serde(default)]
    pub indicators: Vec<String>,
}

fn logit() -> Backbone {
    Backbone::Logit
}

// `deny_unknown_fields` does not combine with `flatten`.
#[derive(Debug, Clone, Deserialize)]
pub struct SearchConfig {
    #[serde(flatten)]
    pub space: SearchSpace,
    pub budget: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub covariates: Vec<Covariate>,
    /// Natural-scale parameter values by segment name; unlisted segments
    /// keep their initial values.
    #[serde(default)]
    pub truth: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    #[default]
    All,
    Train,
    Validation,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// A `params.json` written by `fit`.
    pub params: PathBuf,
    #[serde(default)]
    pub split: EvalSplit,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub reports: Vec<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreaksConfig {
    pub column: String,
    pub k: usize,
}

impl RunConfig {
    /// Parses a manifest. Relative paths are taken relative to the
    /// manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|source| CliError::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        cfg.rebase(&base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = &mut self.out {
            fix(p);
        }
        if let Some(p) = &mut self.data {
            fix(p);
        }
        if let Some(e) = &mut self.eval {
            fix(&mut e.params);
        }
        if let Some(c) = &mut self.compare {
            c.reports.iter_mut().for_each(fix);
        }
    }

    /// Applies command-line overrides.
    pub fn override_with(&mut self, seed: Option<u64>, deterministic: bool, out: Option<PathBuf>) {
        if let Some(s) = seed {
            self.seed = Some(s);
        }
        if let Some(s) = self.seed {
            self.train.seed = s;
        }
        if deterministic {
            self.deterministic = true;
            self.train.deterministic = true;
        }
        if out.is_some() {
            self.out = out;
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn data_path(&self) -> Result<&Path> {
        let p = self.data.as_deref().ok_or_else(|| CliError::Config("missing 'data' path".into()))?;
        if !p.exists() {
            return Err(CliError::Config(format!("data file {} does not exist", p.display())));
        }
        Ok(p)
    }

    pub fn model(&self) -> Result<&ModelConfig> {
        self.model.as_ref().ok_or_else(|| CliError::Config("missing [model] section".into()))
    }
}

impl ModelConfig {
    /// The families to fit, in the canonical order for `"all"`.
    pub fn families(&self) -> Result<Vec<CopulaFamily>> {
        if self.family.trim().eq_ignore_ascii_case("all") {
            return Ok(CopulaFamily::ALL.to_vec());
        }
        self.family
            .parse::<CopulaFamily>()
            .map(|f| vec![f])
            .map_err(|e| CliError::Usage(format!("{e}, all")))
    }

    pub fn single_family(&self) -> Result<CopulaFamily> {
        match self.families()?.as_slice() {
            [f] => Ok(*f),
            _ => Err(CliError::Usage("this command needs a single copula family, not 'all'".into())),
        }
    }

    pub fn spec(&self, family: CopulaFamily) -> Result<ModelSpec> {
        let spec = ModelSpec {
            first: self.first.clone(),
            second: self.second.clone(),
            backbone: self.backbone,
            family,
            indicators: self.indicators.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}
