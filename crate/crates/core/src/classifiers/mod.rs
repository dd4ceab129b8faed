//! Tree ensembles, feature importance, and threshold selection.

mod boost;
mod dataset;
mod forest;
mod importance;
mod model;
pub(crate) mod pr;
mod tree;

pub use boost::{train_adaboost, BoostConfig, BoostModel, WeightedTree, MAX_ALPHA};
pub use dataset::{ClassWeighting, Dataset, FeatureMask};
pub use forest::{train_forest, tree_rng, ForestConfig, ForestModel};
pub use importance::{gini_importance, importance_ranking};
pub use model::{Model, ModelFile, MODEL_FORMAT, MODEL_VERSION};
pub use pr::{average_precision, pr_curve, pr_threshold_select, PrPoint, PrSelection, ThresholdPolicy};
pub use tree::{train_tree, train_tree_presorted, Presorted, TreeNode, TreeParams};

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("sample weights must be finite, non-negative, and not all zero")]
    InvalidWeights,
    #[error("expected {expected} values, found {found}")]
    FeatureDimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in row {row}, feature {feature}")]
    NonFiniteFeature { row: usize, feature: usize },
    #[error("scores need at least one positive and one negative label")]
    SingleClassInput,
    #[error("no threshold satisfies the {0}")]
    PolicyUnsatisfiable(String),
    #[error("model file is {found}, expected {expected}")]
    VersionMismatch { expected: String, found: String },
    #[error("model features {found:?} do not match {expected:?}")]
    FeatureNamesMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
