//! Fixtures for the criterion benchmarks in `benches/`.

use copjoint_core::data::{simulate, Covariate, SyntheticTruth};
use copjoint_core::{Backbone, BlockKind, BlockSpec, CopulaFamily, Dataset, JointModel, ModelSpec};

/// A simulated ordinal–ordinal (or multinomial–ordinal) problem with four
/// features per block, plus starting parameters.
pub fn fixture(family: CopulaFamily, backbone: Backbone, multinomial: bool, n: usize) -> (JointModel, Vec<f64>, Dataset) {
    let features: Vec<String> = (1..=4).map(|i| format!("x{i}")).collect();
    let first_kind = if multinomial {
        BlockKind::Multinomial { alternatives: 3 }
    } else {
        BlockKind::Ordinal { levels: 3 }
    };
    let spec = ModelSpec {
        first: BlockSpec {
            outcome: "a".into(),
            kind: first_kind,
            features: features.clone(),
            labels: None,
        },
        second: BlockSpec {
            outcome: "b".into(),
            kind: BlockKind::Ordinal { levels: 4 },
            features: features.clone(),
            labels: None,
        },
        backbone,
        family,
        indicators: vec![],
    };
    let covariates = features.iter().map(|f| Covariate::normal(f)).collect();
    let truth = SyntheticTruth::new(spec.clone(), covariates, 42).expect("valid truth");
    let data = simulate(&truth, n).expect("simulation").dataset;
    let model = JointModel::new(spec, &data.columns).expect("valid model");
    let params = model.initial_params(Some(&data)).values;
    (model, params, data)
}
