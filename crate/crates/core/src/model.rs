//! Declarative joint-model specification, the flat parameter layout, and
//! per-observation evaluation of both marginal blocks.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::copula::CopulaFamily;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimation::reparam::{initial_eta, theta_from_eta_generic};
use crate::marginal::{
    coral_bias_values, coral_cumulative, ordered_logit_cumulative_generic, residual_forward_generic,
    softmax, threshold_values,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BlockKind {
    Ordinal { levels: usize },
    Multinomial { alternatives: usize },
}

impl BlockKind {
    pub fn categories(&self) -> usize {
        match *self {
            BlockKind::Ordinal { levels } => levels,
            BlockKind::Multinomial { alternatives } => alternatives,
        }
    }

    pub fn is_ordinal(&self) -> bool {
        matches!(self, BlockKind::Ordinal { .. })
    }
}

/// One dependent outcome with its explanatory features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    /// Outcome column.
    pub outcome: String,
    pub kind: BlockKind,
    #[serde(default)]
    pub features: Vec<String>,
    /// Category labels in order; inferred from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Backbone {
    /// Ordered logit / multinomial logit marginals.
    Logit,
    /// Residual stacks of the given depth under CORAL / softmax heads.
    #[serde(rename = "reslogit")]
    ResLogit { depth: usize },
}

impl Backbone {
    pub fn depth(&self) -> usize {
        match *self {
            Backbone::Logit => 0,
            Backbone::ResLogit { depth } => depth,
        }
    }
}

impl fmt::Display for Backbone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backbone::Logit => f.write_str("Logit"),
            Backbone::ResLogit { depth } => write!(f, "ResLogit(M={depth})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub first: BlockSpec,
    /// Always ordinal.
    pub second: BlockSpec,
    pub backbone: Backbone,
    pub family: CopulaFamily,
    /// Feature columns that must hold 0/1 indicators.
    #[serde(default)]
    pub indicators: Vec<String>,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.second.kind.is_ordinal() {
            return Err(Error::Schema(
                "the second block must be ordinal (ordinal-ordinal or multinomial-ordinal)".into(),
            ));
        }
        for block in [&self.first, &self.second] {
            if block.kind.categories() < 2 {
                return Err(Error::Schema(format!(
                    "block '{}' needs at least two categories",
                    block.outcome
                )));
            }
            if let Some(labels) = &block.labels {
                if labels.len() != block.kind.categories() {
                    return Err(Error::Schema(format!(
                        "block '{}' lists {} labels for {} categories",
                        block.outcome,
                        labels.len(),
                        block.kind.categories()
                    )));
                }
            }
        }
        if self.first.outcome == self.second.outcome {
            return Err(Error::Schema("both blocks use the same outcome column".into()));
        }
        Ok(())
    }

    pub fn with_family(&self, family: CopulaFamily) -> Self {
        Self {
            family,
            ..self.clone()
        }
    }

    pub fn with_backbone(&self, backbone: Backbone) -> Self {
        Self {
            backbone,
            ..self.clone()
        }
    }

    /// Number of copula parameters: none for Product, one per alternative for
    /// multinomial–ordinal joints, otherwise one.
    pub fn copula_dim(&self) -> usize {
        if !self.family.has_parameter() {
            0
        } else {
            match self.first.kind {
                BlockKind::Ordinal { .. } => 1,
                BlockKind::Multinomial { alternatives } => alternatives,
            }
        }
    }

    /// `"Frank-Logit"`, `"Product-ResLogit(M=16)"`, ...
    pub fn label(&self) -> String {
        let family = match self.family {
            CopulaFamily::Amh => "AMH".to_string(),
            CopulaFamily::Fgm => "FGM".to_string(),
            f => {
                let n = f.name();
                n[..1].to_uppercase() + &n[1..]
            }
        };
        format!("{family}-{}", self.backbone)
    }
}

/// A named contiguous slice of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Segment {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterLayout {
    pub segments: Vec<Segment>,
}

impl ParameterLayout {
    fn push(&mut self, name: String, len: usize) -> Range<usize> {
        let start = self.len();
        self.segments.push(Segment { name, start, len });
        start..start + len
    }

    pub fn len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.start + s.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }

    /// `"first.beta[2]"` for flat index `i`.
    pub fn describe(&self, i: usize) -> String {
        self.segments
            .iter()
            .find(|s| s.range().contains(&i))
            .map_or_else(|| format!("#{i}"), |s| format!("{}[{}]", s.name, i - s.start))
    }
}

/// Flat parameter vector together with its layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub layout: ParameterLayout,
    pub values: Vec<f64>,
}

impl ParameterSet {
    pub fn new(layout: ParameterLayout, values: Vec<f64>) -> Result<Self> {
        if layout.len() != values.len() {
            return Err(Error::Layout(format!(
                "layout expects {} parameters, got {}",
                layout.len(),
                values.len()
            )));
        }
        Ok(Self { layout, values })
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.layout.segment(name).map(|s| &self.values[s.range()])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let range = self.layout.segment(name)?.range();
        Some(&mut self.values[range])
    }

    /// Splits into `(segment name, values)` pairs.
    pub fn unpack(&self) -> Vec<(String, Vec<f64>)> {
        self.layout
            .segments
            .iter()
            .map(|s| (s.name.clone(), self.values[s.range()].to_vec()))
            .collect()
    }

    /// Inverse of [`ParameterSet::unpack`].
    pub fn pack(layout: &ParameterLayout, parts: &[(String, Vec<f64>)]) -> Result<Self> {
        let mut values = vec![0.0; layout.len()];
        if parts.len() != layout.segments.len() {
            return Err(Error::Layout(format!(
                "{} segments supplied, layout has {}",
                parts.len(),
                layout.segments.len()
            )));
        }
        for (seg, (name, vals)) in layout.segments.iter().zip(parts) {
            if &seg.name != name || seg.len != vals.len() {
                return Err(Error::Layout(format!(
                    "segment '{name}' ({}) does not match '{}' ({})",
                    vals.len(),
                    seg.name,
                    seg.len
                )));
            }
            values[seg.range()].copy_from_slice(vals);
        }
        Ok(Self {
            layout: layout.clone(),
            values,
        })
    }
}

/// Offsets of one block's parameters. Absent pieces are empty ranges.
#[derive(Debug, Clone, Default)]
struct BlockLayout {
    beta: Range<usize>,
    thresholds: Range<usize>,
    asc: Range<usize>,
    residual: Range<usize>,
    coral_weight: Range<usize>,
    coral_bias: Range<usize>,
}

/// A [`ModelSpec`] resolved against dataset columns, with its parameter
/// layout.
#[derive(Debug, Clone)]
pub struct JointModel {
    pub spec: ModelSpec,
    pub layout: ParameterLayout,
    first_features: Vec<usize>,
    second_features: Vec<usize>,
    first_offsets: BlockLayout,
    second_offsets: BlockLayout,
    eta: Range<usize>,
}

fn block_layout(
    layout: &mut ParameterLayout,
    prefix: &str,
    block: &BlockSpec,
    backbone: Backbone,
) -> BlockLayout {
    let d = block.features.len();
    let depth = backbone.depth();
    let mut out = BlockLayout::default();
    match (block.kind, backbone) {
        (BlockKind::Ordinal { levels }, Backbone::Logit) => {
            out.beta = layout.push(format!("{prefix}.beta"), d);
            out.thresholds = layout.push(format!("{prefix}.thresholds"), levels - 1);
        }
        (BlockKind::Ordinal { levels }, Backbone::ResLogit { .. }) => {
            out.beta = layout.push(format!("{prefix}.beta"), d);
            out.residual = layout.push(format!("{prefix}.residual"), depth * d * d);
            out.coral_weight = layout.push(format!("{prefix}.coral_weight"), d);
            out.coral_bias = layout.push(format!("{prefix}.coral_bias"), levels - 1);
        }
        (BlockKind::Multinomial { alternatives }, _) => {
            out.asc = layout.push(format!("{prefix}.asc"), alternatives - 1);
            out.beta = layout.push(format!("{prefix}.beta"), (alternatives - 1) * d);
            if depth > 0 {
                out.residual = layout.push(
                    format!("{prefix}.residual"),
                    depth * alternatives * alternatives,
                );
            }
        }
    }
    out
}

fn resolve(columns: &[String], wanted: &[String]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Schema(format!("feature column '{name}' not found")))
        })
        .collect()
}

/// Marginal output of one block for one observation.
#[derive(Debug, Clone)]
pub enum BlockOutput<T> {
    /// `(0, P(y <= 1), ..., 1)`, length `K + 1`.
    Cumulative(Vec<T>),
    /// Alternative probabilities, length `J`.
    Probabilities(Vec<T>),
}

/// Block parameters after the reparameterizations, computed once per batch.
pub(crate) struct PreparedBlock<T> {
    kind: BlockKind,
    depth: usize,
    beta: Vec<T>,
    thresholds: Vec<T>,
    asc: Vec<T>,
    residual: Vec<T>,
    coral_weight: Vec<T>,
    coral_bias: Vec<T>,
}

impl<T: Real> PreparedBlock<T> {
    fn new(kind: BlockKind, backbone: Backbone, offsets: &BlockLayout, params: &[T]) -> Self {
        let slice = |r: &Range<usize>| params[r.clone()].to_vec();
        Self {
            kind,
            depth: backbone.depth(),
            beta: slice(&offsets.beta),
            thresholds: threshold_values(&params[offsets.thresholds.clone()]),
            asc: slice(&offsets.asc),
            residual: slice(&offsets.residual),
            coral_weight: slice(&offsets.coral_weight),
            coral_bias: coral_bias_values(&params[offsets.coral_bias.clone()]),
        }
    }

    pub(crate) fn evaluate(&self, x: &[f64]) -> BlockOutput<T> {
        match self.kind {
            BlockKind::Ordinal { .. } if self.depth == 0 && self.coral_bias.is_empty() => {
                let index = self
                    .beta
                    .iter()
                    .zip(x)
                    .fold(T::cst(0.0), |acc, (&b, &xi)| acc + b * xi);
                BlockOutput::Cumulative(ordered_logit_cumulative_generic(index, &self.thresholds))
            }
            BlockKind::Ordinal { .. } => {
                let h0: Vec<T> = self.beta.iter().zip(x).map(|(&b, &xi)| b * xi).collect();
                let rep = residual_forward_generic(&self.residual, self.depth, &h0);
                let score = T::dot(&self.coral_weight, &rep);
                BlockOutput::Cumulative(coral_cumulative(score, &self.coral_bias))
            }
            BlockKind::Multinomial { alternatives } => {
                let d = x.len();
                let mut v = Vec::with_capacity(alternatives);
                v.push(T::cst(0.0));
                for j in 1..alternatives {
                    let row = &self.beta[(j - 1) * d..j * d];
                    let u = row
                        .iter()
                        .zip(x)
                        .fold(self.asc[j - 1], |acc, (&b, &xi)| acc + b * xi);
                    v.push(u);
                }
                if self.depth > 0 {
                    v = residual_forward_generic(&self.residual, self.depth, &v);
                }
                BlockOutput::Probabilities(softmax(&v))
            }
        }
    }
}

/// All parameters of a joint model after reparameterization.
pub(crate) struct PreparedModel<T> {
    pub first: PreparedBlock<T>,
    pub second: PreparedBlock<T>,
    /// Copula parameters (empty for Product).
    pub thetas: Vec<T>,
}

impl JointModel {
    pub fn new(spec: ModelSpec, columns: &[String]) -> Result<Self> {
        spec.validate()?;
        let first_features = resolve(columns, &spec.first.features)?;
        let second_features = resolve(columns, &spec.second.features)?;
        let mut layout = ParameterLayout::default();
        let first_offsets = block_layout(&mut layout, "first", &spec.first, spec.backbone);
        let second_offsets = block_layout(&mut layout, "second", &spec.second, spec.backbone);
        let eta = layout.push("copula.eta".into(), spec.copula_dim());
        Ok(Self {
            spec,
            layout,
            first_features,
            second_features,
            first_offsets,
            second_offsets,
            eta,
        })
    }

    pub fn n_params(&self) -> usize {
        self.layout.len()
    }

    pub fn family(&self) -> CopulaFamily {
        self.spec.family
    }

    pub fn first_categories(&self) -> usize {
        self.spec.first.kind.categories()
    }

    pub fn second_categories(&self) -> usize {
        self.spec.second.kind.categories()
    }

    pub fn eta_range(&self) -> Range<usize> {
        self.eta.clone()
    }

    pub(crate) fn prepare<T: Real>(&self, params: &[T]) -> PreparedModel<T> {
        debug_assert_eq!(params.len(), self.layout.len());
        let backbone = self.spec.backbone;
        PreparedModel {
            first: PreparedBlock::new(self.spec.first.kind, backbone, &self.first_offsets, params),
            second: PreparedBlock::new(self.spec.second.kind, backbone, &self.second_offsets, params),
            thetas: params[self.eta.clone()]
                .iter()
                .map(|&e| theta_from_eta_generic(self.spec.family, e))
                .collect(),
        }
    }

    /// Gathers the row's features for each block.
    pub(crate) fn gather(&self, data: &Dataset, row: usize, first: &mut Vec<f64>, second: &mut Vec<f64>) {
        let x = data.row(row);
        first.clear();
        first.extend(self.first_features.iter().map(|&c| x[c]));
        second.clear();
        second.extend(self.second_features.iter().map(|&c| x[c]));
    }

    /// Marginal outputs of both blocks for one observation.
    pub fn marginals(&self, params: &[f64], data: &Dataset, row: usize) -> (BlockOutput<f64>, BlockOutput<f64>) {
        let prepared = self.prepare(params);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        self.gather(data, row, &mut a, &mut b);
        (prepared.first.evaluate(&a), prepared.second.evaluate(&b))
    }

    /// Copula parameters implied by `params`.
    pub fn thetas(&self, params: &[f64]) -> Vec<f64> {
        params[self.eta.clone()]
            .iter()
            .map(|&e| theta_from_eta_generic(self.spec.family, e))
            .collect()
    }

    /// Parameter vector with identity residual stacks, unit CORAL weights,
    /// thresholds / biases / constants matched to the empirical marginal
    /// frequencies of `data` (uniform when absent) and near-independent
    /// copula parameters.
    pub fn initial_params(&self, data: Option<&Dataset>) -> ParameterSet {
        let mut values = vec![0.0; self.layout.len()];
        let depth = self.spec.backbone.depth() as f64;
        let freq = |first: bool| -> Vec<f64> {
            let k = if first { self.first_categories() } else { self.second_categories() };
            let mut counts = vec![1.0; k];
            if let Some(d) = data {
                let outcomes = if first { &d.first } else { &d.second };
                for &y in outcomes {
                    counts[y] += 1.0;
                }
            }
            let total: f64 = counts.iter().sum();
            counts.iter().map(|c| c / total).collect()
        };
        let logit = |p: f64| (p / (1.0 - p)).ln();
        for (is_first, block, offsets) in [
            (true, &self.spec.first, &self.first_offsets),
            (false, &self.spec.second, &self.second_offsets),
        ] {
            let f = freq(is_first);
            let d = block.features.len() as f64;
            match block.kind {
                BlockKind::Ordinal { .. } => {
                    let mut cum = 0.0;
                    let psi: Vec<f64> = f[..f.len() - 1]
                        .iter()
                        .map(|p| {
                            cum += p;
                            logit(cum.clamp(1e-6, 1.0 - 1e-6))
                        })
                        .collect();
                    if !offsets.thresholds.is_empty() {
                        let raw = crate::marginal::ThresholdSet::from_thresholds(&psi).raw;
                        values[offsets.thresholds.clone()].copy_from_slice(&raw);
                    } else {
                        // score = -d M ln2 at beta = 0, W = 0, a = 1; biases
                        // b_k = -psi_k - score reproduce the frequencies
                        let shift = d * depth * std::f64::consts::LN_2;
                        let b: Vec<f64> = psi.iter().map(|p| -p + shift).collect();
                        let mut raw = Vec::with_capacity(b.len());
                        for (k, &bk) in b.iter().enumerate() {
                            raw.push(if k == 0 { bk } else { (b[k - 1] - bk).max(1e-12).ln() });
                        }
                        values[offsets.coral_bias.clone()].copy_from_slice(&raw);
                        for w in &mut values[offsets.coral_weight.clone()] {
                            *w = 1.0;
                        }
                    }
                }
                BlockKind::Multinomial { .. } => {
                    for (j, slot) in values[offsets.asc.clone()].iter_mut().enumerate() {
                        *slot = (f[j + 1] / f[0]).ln();
                    }
                }
            }
        }
        let eta0 = initial_eta(self.spec.family);
        for e in &mut values[self.eta.clone()] {
            *e = eta0;
        }
        ParameterSet {
            layout: self.layout.clone(),
            values,
        }
    }

    /// Checks that a parameter set was produced for this model.
    pub fn check_params(&self, params: &ParameterSet) -> Result<()> {
        if params.layout != self.layout {
            let expected: Vec<String> = self
                .layout
                .segments
                .iter()
                .map(|s| format!("{}:{}", s.name, s.len))
                .collect();
            let got: Vec<String> = params
                .layout
                .segments
                .iter()
                .map(|s| format!("{}:{}", s.name, s.len))
                .collect();
            return Err(Error::Layout(format!(
                "model expects [{}], parameter file has [{}]",
                expected.join(", "),
                got.join(", ")
            )));
        }
        if params.values.len() != self.layout.len() {
            return Err(Error::Layout("value count does not match layout".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn ordinal_spec(backbone: Backbone, family: CopulaFamily) -> ModelSpec {
        ModelSpec {
            first: BlockSpec {
                outcome: "a".into(),
                kind: BlockKind::Ordinal { levels: 3 },
                features: vec!["x1".into(), "x2".into()],
                labels: None,
            },
            second: BlockSpec {
                outcome: "b".into(),
                kind: BlockKind::Ordinal { levels: 2 },
                features: vec!["x2".into()],
                labels: None,
            },
            backbone,
            family,
            indicators: vec![],
        }
    }

    fn columns() -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }

    #[test]
    fn copula_adds_one_parameter_over_product() {
        let frank = JointModel::new(ordinal_spec(Backbone::Logit, CopulaFamily::Frank), &columns()).unwrap();
        let prod = JointModel::new(ordinal_spec(Backbone::Logit, CopulaFamily::Product), &columns()).unwrap();
        assert_eq!(frank.n_params(), prod.n_params() + 1);
        // 2 + 2 thresholds + 1 + 1 threshold + eta
        assert_eq!(frank.n_params(), 7);
    }

    #[test]
    fn reslogit_layout_counts() {
        let m = JointModel::new(
            ordinal_spec(Backbone::ResLogit { depth: 16 }, CopulaFamily::Product),
            &columns(),
        )
        .unwrap();
        // first: beta 2, residual 16*4, coral weight 2, biases 2
        // second: beta 1, residual 16, coral weight 1, bias 1
        assert_eq!(m.n_params(), 2 + 64 + 2 + 2 + 1 + 16 + 1 + 1);
        assert_eq!(m.layout.describe(5), "first.residual[3]");
    }

    #[test]
    fn multinomial_copula_has_one_theta_per_alternative() {
        let mut spec = ordinal_spec(Backbone::Logit, CopulaFamily::Frank);
        spec.first.kind = BlockKind::Multinomial { alternatives: 3 };
        let m = JointModel::new(spec, &columns()).unwrap();
        assert_eq!(m.eta_range().len(), 3);
        // asc 2 + beta 2*2, second beta 1 + threshold 1, eta 3
        assert_eq!(m.n_params(), 2 + 4 + 1 + 1 + 3);
    }

    #[test]
    fn missing_feature_is_a_schema_error() {
        let err = JointModel::new(ordinal_spec(Backbone::Logit, CopulaFamily::Frank), &["x1".to_string()]);
        assert!(matches!(err, Err(Error::Schema(_))));
    }

    #[test]
    fn second_block_must_be_ordinal() {
        let mut spec = ordinal_spec(Backbone::Logit, CopulaFamily::Frank);
        spec.second.kind = BlockKind::Multinomial { alternatives: 3 };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn layout_mismatch_detected() {
        let a = JointModel::new(ordinal_spec(Backbone::Logit, CopulaFamily::Frank), &columns()).unwrap();
        let b = JointModel::new(ordinal_spec(Backbone::Logit, CopulaFamily::Product), &columns()).unwrap();
        assert!(matches!(a.check_params(&b.initial_params(None)), Err(Error::Layout(_))));
        assert!(a.check_params(&a.initial_params(None)).is_ok());
    }

    #[test]
    fn labels() {
        assert_eq!(ordinal_spec(Backbone::Logit, CopulaFamily::Amh).label(), "AMH-Logit");
        assert_eq!(
            ordinal_spec(Backbone::ResLogit { depth: 16 }, CopulaFamily::Product).label(),
            "Product-ResLogit(M=16)"
        );
    }

    proptest! {
        #[test]
        fn pack_unpack_round_trip(values in prop::collection::vec(-10.0f64..10.0, 96)) {
            let m = JointModel::new(
                ordinal_spec(Backbone::ResLogit { depth: 4 }, CopulaFamily::Gaussian),
                &columns(),
            ).unwrap();
            let n = m.n_params();
            let p = ParameterSet::new(m.layout.clone(), values[..n].to_vec()).unwrap();
            let back = ParameterSet::pack(&m.layout, &p.unpack()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
