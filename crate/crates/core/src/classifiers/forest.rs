use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::tree::{train_tree_presorted, Presorted, TreeParams};
use crate::classifiers::{ClassWeighting, ClassifierError, Dataset, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features drawn per split; `None` means `floor(sqrt(d))`.
    pub max_features: Option<usize>,
    pub class_weighting: ClassWeighting,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 200,
            max_depth: 5,
            max_features: None,
            class_weighting: ClassWeighting::Balanced,
        }
    }
}

impl ForestConfig {
    pub fn features_per_split(&self, n_features: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub trees: Vec<TreeNode>,
}

impl ForestModel {
    /// Fraction of trees voting positive.
    pub fn score(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        let votes = self.trees.iter().filter(|t| t.predict(x)).count();
        votes as f64 / self.trees.len() as f64
    }
}

/// The RNG driving tree `index` of a forest seeded with `seed`. ChaCha8 with
/// the tree index as stream id, so output is platform- and
/// schedule-independent.
pub fn tree_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random forest: every tree sees a bootstrap resample (as per-row draw
/// counts) and a fresh random feature subset at each split.
pub fn train_forest(data: &Dataset, cfg: &ForestConfig, seed: u64) -> Result<ForestModel, ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let presorted = Presorted::new(data);
    let base = data.class_weights(cfg.class_weighting);
    let params = TreeParams {
        max_depth: cfg.max_depth,
        feature_subset_size: cfg.features_per_split(data.n_features()),
    };
    let n = data.n_rows();
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_rng(seed, i as u64);
            let mut weights = vec![0.0; n];
            for _ in 0..n {
                weights[rng.random_range(0..n as u64) as usize] += 1.0;
            }
            for (w, b) in weights.iter_mut().zip(&base) {
                *w *= b;
            }
            train_tree_presorted(data, &presorted, &weights, params, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ForestModel {
        config: *cfg,
        feature_names: data.feature_names().to_vec(),
        seed,
        trees,
    })
}
