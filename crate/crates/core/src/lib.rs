//! Copula-based joint discrete-choice models.
//!
//! Two dependent outcomes (ordinal–ordinal, or multinomial–ordinal) are
//! coupled through a bivariate copula over their marginal CDFs. Marginals are
//! either classic logit models (ordered logit, multinomial logit) or
//! residual-logit models whose utilities pass through a stack of residual
//! layers `h -> h - ln(1 + exp(W h))` before an ordinal (CORAL) or softmax
//! head. Parameters are fit by mini-batch RMSprop with early stopping, and
//! competing dependence structures are ranked by AIC.

pub mod autodiff;
pub mod copula;
pub mod data;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod joint;
pub mod marginal;
pub mod model;
pub mod scalar;
pub mod special;
pub mod stats;

pub use copula::{CopulaFamily, CopulaSpec, ThetaCheck};
pub use data::Dataset;
pub use error::{Error, Result};
pub use estimation::{FittedModel, TrainConfig};
pub use evaluation::{Comparison, FitReport};
pub use joint::JointCellMatrix;
pub use model::{Backbone, BlockKind, BlockSpec, JointModel, ModelSpec, ParameterLayout, ParameterSet};
pub use scalar::Real;
