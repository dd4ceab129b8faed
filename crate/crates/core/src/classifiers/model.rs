use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::classifiers::{BoostModel, ClassifierError, FeatureMask, ForestModel};
use crate::features::WindowConfig;
use crate::trade::FeatureVector;

pub const MODEL_FORMAT: &str = "pumpwatch-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Model {
    RandomForest(ForestModel),
    AdaBoost(BoostModel),
}

impl Model {
    pub fn feature_names(&self) -> &[String] {
        match self {
            Model::RandomForest(m) => &m.feature_names,
            Model::AdaBoost(m) => &m.feature_names,
        }
    }

    /// Score in `[0, 1]`; the positive decision is `score >= 0.5`.
    pub fn predict(&self, x: &[f64]) -> Result<f64, ClassifierError> {
        let expected = self.feature_names().len();
        if x.len() != expected {
            return Err(ClassifierError::FeatureDimensionMismatch {
                expected,
                found: x.len(),
            });
        }
        Ok(self.score_unchecked(x))
    }

    pub(crate) fn score_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Model::RandomForest(m) => m.score(x),
            Model::AdaBoost(m) => m.score(x),
        }
    }
}

/// A model together with the feature layout it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub feature_mask: FeatureMask,
    /// Chunking the training features were computed with.
    pub window: Option<WindowConfig>,
    pub model: Model,
}

impl ModelFile {
    pub fn new(model: Model, feature_mask: FeatureMask, window: Option<WindowConfig>) -> Result<Self, ClassifierError> {
        let expected = feature_mask.names();
        if model.feature_names() != expected.as_slice() {
            return Err(ClassifierError::FeatureNamesMismatch {
                expected,
                found: model.feature_names().to_vec(),
            });
        }
        Ok(ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            feature_mask,
            window,
            model,
        })
    }

    pub fn predict(&self, f: &FeatureVector) -> f64 {
        self.model.score_unchecked(&self.feature_mask.select(f))
    }

    pub fn save<W: Write>(&self, out: W) -> Result<(), ClassifierError> {
        serde_json::to_writer(out, self)?;
        Ok(())
    }

    pub fn load<R: Read>(input: R) -> Result<Self, ClassifierError> {
        let value: serde_json::Value = serde_json::from_reader(input)?;
        let format = value.get("format").and_then(|v| v.as_str()).unwrap_or("<missing>");
        let version = value.get("version").and_then(|v| v.as_u64());
        if format != MODEL_FORMAT || version != Some(MODEL_VERSION as u64) {
            return Err(ClassifierError::VersionMismatch {
                expected: format!("{MODEL_FORMAT} v{MODEL_VERSION}"),
                found: format!("{format} v{}", version.map_or("?".to_string(), |v| v.to_string())),
            });
        }
        let file: ModelFile = serde_json::from_value(value)?;
        ModelFile::new(file.model, file.feature_mask, file.window)
    }
}
