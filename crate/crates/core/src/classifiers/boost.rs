//! Discrete two-class SAMME boosting over depth-limited trees.

use serde::{Deserialize, Serialize};

use crate::classifiers::forest::tree_rng;
use crate::classifiers::tree::{train_tree_presorted, Presorted, TreeParams};
use crate::classifiers::{ClassWeighting, ClassifierError, Dataset, TreeNode};

/// Vote weight given to a learner with zero weighted error.
pub const MAX_ALPHA: f64 = 23.025850929940457; // ln((1 - 1e-10) / 1e-10)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub class_weighting: ClassWeighting,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            n_rounds: 50,
            max_depth: 5,
            class_weighting: ClassWeighting::Balanced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTree {
    pub tree: TreeNode,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub config: BoostConfig,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub learners: Vec<WeightedTree>,
}

impl BoostModel {
    pub fn n_rounds(&self) -> usize {
        self.learners.len()
    }

    /// Share of total vote weight on the positive class, `(margin + 1) / 2`
    /// for margin `Σ α·h(x) / Σ α` with `h ∈ {−1, +1}`.
    pub fn score(&self, x: &[f64]) -> f64 {
        let total: f64 = self.learners.iter().map(|l| l.alpha).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let positive: f64 = self.learners.iter().filter(|l| l.tree.predict(x)).map(|l| l.alpha).sum();
        positive / total
    }

    /// The model truncated to its first `rounds` learners.
    pub fn truncated(&self, rounds: usize) -> BoostModel {
        BoostModel {
            learners: self.learners.iter().take(rounds).cloned().collect(),
            ..self.clone()
        }
    }
}

/// Boosting rounds reweight misclassified rows by `exp(alpha)`, with
/// `alpha = ln((1 − err) / err)`. Training stops early once a learner has
/// zero error (kept with [`MAX_ALPHA`]) or no better than chance (dropped,
/// unless it is the only one).
pub fn train_adaboost(data: &Dataset, cfg: &BoostConfig, seed: u64) -> Result<BoostModel, ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let presorted = Presorted::new(data);
    let labels = data.labels();
    let mut weights = data.class_weights(cfg.class_weighting);
    normalize(&mut weights);
    let params = TreeParams {
        max_depth: cfg.max_depth,
        feature_subset_size: usize::MAX,
    };
    let mut learners = Vec::new();
    for round in 0..cfg.n_rounds.max(1) {
        let mut rng = tree_rng(seed, round as u64);
        let tree = train_tree_presorted(data, &presorted, &weights, params, &mut rng)?;
        let wrong: Vec<bool> = (0..data.n_rows())
            .map(|i| tree.predict(&data.row(i)) != labels[i])
            .collect();
        let err: f64 = weights.iter().zip(&wrong).filter(|(_, &w)| w).map(|(x, _)| x).sum();
        if err <= 0.0 {
            learners.push(WeightedTree { tree, alpha: MAX_ALPHA });
            break;
        }
        if err >= 0.5 {
            if learners.is_empty() {
                learners.push(WeightedTree { tree, alpha: 1.0 });
            }
            break;
        }
        let alpha = ((1.0 - err) / err).ln().min(MAX_ALPHA);
        let boost = alpha.exp();
        for (w, &bad) in weights.iter_mut().zip(&wrong) {
            if bad {
                *w *= boost;
            }
        }
        normalize(&mut weights);
        learners.push(WeightedTree { tree, alpha });
    }
    Ok(BoostModel {
        config: *cfg,
        feature_names: data.feature_names().to_vec(),
        seed,
        learners,
    })
}

fn normalize(w: &mut [f64]) {
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        for v in w {
            *v /= total;
        }
    }
}
