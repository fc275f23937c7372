//! Synthetic joint-choice data with known dependence.

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Normal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::copula::{sample_pair, CopulaSpec};
use crate::error::{Error, Result};
use crate::estimation::reparam::eta_from_theta;
use crate::marginal::ThresholdSet;
use crate::model::{BlockOutput, JointModel, ModelSpec, ParameterSet};

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

/// How a covariate column is generated. Derived kinds refer to columns
/// listed before them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum CovariateKind {
    Normal {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        sd: f64,
    },
    Bernoulli {
        #[serde(default = "half")]
        p: f64,
    },
    Square { of: String },
    Abs { of: String },
    Product { of: [String; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariate {
    pub name: String,
    #[serde(flatten)]
    pub kind: CovariateKind,
}

impl Covariate {
    pub fn normal(name: &str) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Normal { mean: 0.0, sd: 1.0 },
        }
    }

    pub fn bernoulli(name: &str) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Bernoulli { p: 0.5 },
        }
    }
}

/// A generating model: specification, true parameters, covariate design
/// and seed. The same truth always produces the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub spec: ModelSpec,
    pub params: ParameterSet,
    pub covariates: Vec<Covariate>,
    pub seed: u64,
}

impl SyntheticTruth {
    /// A truth with initial (uniform-margin, near-independent) parameters.
    pub fn new(spec: ModelSpec, covariates: Vec<Covariate>, seed: u64) -> Result<Self> {
        let model = JointModel::new(spec.clone(), &covariate_names(&covariates))?;
        let mut params = model.initial_params(None);
        // start the one-sided families exactly at independence
        if let Some(eta) = params.get_mut("copula.eta") {
            let e = eta_from_theta(spec.family, spec.family.independence_theta());
            eta.iter_mut().for_each(|x| *x = e);
        }
        Ok(Self {
            spec,
            params,
            covariates,
            seed,
        })
    }

    pub fn model(&self) -> Result<JointModel> {
        JointModel::new(self.spec.clone(), &covariate_names(&self.covariates))
    }

    /// Sets a parameter segment from natural-scale values: actual
    /// thresholds for `*.thresholds`, actual decreasing biases for
    /// `*.coral_bias`, copula parameters for `copula.theta`, raw values for
    /// everything else.
    pub fn set(&mut self, name: &str, values: &[f64]) -> Result<()> {
        let family = self.spec.family;
        let (segment, raw): (&str, Vec<f64>) = if name.ends_with(".thresholds") {
            if values.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Domain(format!("{name} must be nondecreasing")));
            }
            (name, ThresholdSet::from_thresholds(values).raw)
        } else if name.ends_with(".coral_bias") {
            if values.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Domain(format!("{name} must be nonincreasing")));
            }
            let raw = values
                .iter()
                .enumerate()
                .map(|(k, &b)| if k == 0 { b } else { (values[k - 1] - b).max(1e-12).ln() })
                .collect();
            (name, raw)
        } else if name == "copula.theta" {
            for &t in values {
                crate::copula::validate_theta(family, t)?;
            }
            ("copula.eta", values.iter().map(|&t| eta_from_theta(family, t)).collect())
        } else {
            (name, values.to_vec())
        };
        let slot = self
            .params
            .get_mut(segment)
            .ok_or_else(|| Error::Layout(format!("no parameter segment '{segment}'")))?;
        if slot.len() != raw.len() {
            return Err(Error::Layout(format!(
                "segment '{segment}' holds {} values, {} given",
                slot.len(),
                raw.len()
            )));
        }
        slot.copy_from_slice(&raw);
        Ok(())
    }
}

fn covariate_names(covariates: &[Covariate]) -> Vec<String> {
    covariates.iter().map(|c| c.name.clone()).collect()
}

/// Simulated dataset plus, for ordinal–ordinal truths, the latent copula
/// draws behind each observation.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub dataset: Dataset,
    pub latent: Option<Vec<(f64, f64)>>,
}

fn draw_covariates(covariates: &[Covariate], n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let d = covariates.len();
    let names = covariate_names(covariates);
    let earlier = |j: usize, name: &str| -> Result<usize> {
        names[..j]
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Schema(format!("covariate '{}' refers to unknown or later column '{name}'", names[j])))
    };
    enum Gen {
        Normal(Normal<f64>),
        Bernoulli(Bernoulli),
        Square(usize),
        Abs(usize),
        Product(usize, usize),
    }
    let gens: Vec<Gen> = covariates
        .iter()
        .enumerate()
        .map(|(j, c)| {
            Ok(match &c.kind {
                CovariateKind::Normal { mean, sd } => Gen::Normal(
                    Normal::new(*mean, *sd).map_err(|e| Error::Domain(format!("covariate '{}': {e}", c.name)))?,
                ),
                CovariateKind::Bernoulli { p } => Gen::Bernoulli(
                    Bernoulli::new(*p).map_err(|e| Error::Domain(format!("covariate '{}': {e}", c.name)))?,
                ),
                CovariateKind::Square { of } => Gen::Square(earlier(j, of)?),
                CovariateKind::Abs { of } => Gen::Abs(earlier(j, of)?),
                CovariateKind::Product { of } => Gen::Product(earlier(j, &of[0])?, earlier(j, &of[1])?),
            })
        })
        .collect::<Result<_>>()?;
    let mut x = vec![0.0; n * d];
    for row in x.chunks_mut(d.max(1)).take(n) {
        for (j, g) in gens.iter().enumerate() {
            row[j] = match *g {
                Gen::Normal(ref dist) => dist.sample(rng),
                Gen::Bernoulli(ref dist) => dist.sample(rng) as u8 as f64,
                Gen::Square(a) => row[a] * row[a],
                Gen::Abs(a) => row[a].abs(),
                Gen::Product(a, b) => row[a] * row[b],
            };
        }
    }
    Ok(x)
}

/// Index of the category whose cumulative interval `(cum[i], cum[i+1]]`
/// contains `u`.
fn category_of(cum: &[f64], u: f64) -> usize {
    cum[1..cum.len() - 1].iter().take_while(|&&c| c < u).count()
}

/// Draws `n` observations from `truth`.
///
/// Covariates come first, row by row, from one seeded stream. For
/// ordinal–ordinal truths each outcome pair is then obtained by drawing
/// `(u, v)` from the copula and locating `u`, `v` among the blocks'
/// cumulative points; multinomial–ordinal pairs are drawn from the joint
/// cell matrix.
pub fn simulate(truth: &SyntheticTruth, n: usize) -> Result<Simulated> {
    if n == 0 {
        return Err(Error::Domain("cannot simulate zero observations".into()));
    }
    let model = truth.model()?;
    model.check_params(&truth.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(truth.seed);
    let features = draw_covariates(&truth.covariates, n, &mut rng)?;
    let mut data = Dataset::new(
        covariate_names(&truth.covariates),
        features,
        vec![0; n],
        vec![0; n],
        model.first_categories(),
        model.second_categories(),
    )?;
    if let Some(labels) = &truth.spec.first.labels {
        data.first_labels = labels.clone();
    }
    if let Some(labels) = &truth.spec.second.labels {
        data.second_labels = labels.clone();
    }
    let params = &truth.params.values;
    let thetas = model.thetas(params);
    let ordinal_pair = truth.spec.first.kind.is_ordinal();
    let copula = if ordinal_pair {
        Some(CopulaSpec::new(truth.spec.family, thetas.first().copied().unwrap_or(0.0))?)
    } else {
        None
    };
    let mut latent = Vec::with_capacity(if ordinal_pair { n } else { 0 });
    for row in 0..n {
        match &copula {
            Some(spec) => {
                let (first, second) = model.marginals(params, &data, row);
                let (BlockOutput::Cumulative(u_cum), BlockOutput::Cumulative(v_cum)) = (first, second) else {
                    unreachable!("ordinal blocks yield cumulative points")
                };
                let (u, v) = sample_pair(spec, &mut rng)?;
                data.first[row] = category_of(&u_cum, u);
                data.second[row] = category_of(&v_cum, v);
                latent.push((u, v));
            }
            None => {
                let cells = model.cell_matrix(params, &data, row)?;
                let draw: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = cells.cells.len() - 1;
                for (idx, &c) in cells.cells.iter().enumerate() {
                    acc += c;
                    if draw < acc {
                        chosen = idx;
                        break;
                    }
                }
                data.first[row] = chosen / cells.cols;
                data.second[row] = chosen % cells.cols;
            }
        }
    }
    Ok(Simulated {
        dataset: data,
        latent: ordinal_pair.then_some(latent),
    })
}
