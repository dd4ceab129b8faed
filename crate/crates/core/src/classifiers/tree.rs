//! Weighted CART with Gini impurity.
//!
//! Each feature's rows are sorted once; a node is a contiguous range in every
//! per-feature list, and a split stably partitions all lists so children stay
//! sorted. Split search is then a linear scan per candidate feature.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierError, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        /// Weighted impurity decrease, `W·G(node) − W_l·G(left) − W_r·G(right)`.
        impurity_decrease: f64,
        /// Total sample weight reaching the node.
        weight: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Weighted fraction of positive samples.
        positive_fraction: f64,
        n_samples: usize,
    },
}

impl TreeNode {
    pub fn leaf_fraction(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if x[*feature] <= *threshold { left } else { right },
                TreeNode::Leaf { positive_fraction, .. } => return *positive_fraction,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.leaf_fraction(x) >= 0.5
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeNode::Leaf { .. } => 0,
        }
    }

    /// Adds this tree's impurity decreases into `acc[feature]`.
    pub fn accumulate_importance(&self, acc: &mut [f64]) {
        if let TreeNode::Split {
            feature,
            impurity_decrease,
            left,
            right,
            ..
        } = self
        {
            acc[*feature] += impurity_decrease;
            left.accumulate_importance(acc);
            right.accumulate_importance(acc);
        }
    }

    pub fn root_weight(&self) -> Option<f64> {
        match self {
            TreeNode::Split { weight, .. } => Some(*weight),
            TreeNode::Leaf { .. } => None,
        }
    }
}

/// Row indices of each feature column in ascending value order (ties by row).
#[derive(Debug, Clone)]
pub struct Presorted {
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(data: &Dataset) -> Self {
        let order = (0..data.n_features())
            .map(|f| {
                let col = data.column(f);
                let mut idx: Vec<u32> = (0..data.n_rows() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Presorted { order }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Features drawn per split; `>= n_features` means all.
    pub feature_subset_size: usize,
}

/// Grows one tree. Rows with zero weight are ignored.
pub fn train_tree<R: Rng>(
    data: &Dataset,
    sample_weights: &[f64],
    params: TreeParams,
    rng: &mut R,
) -> Result<TreeNode, ClassifierError> {
    let presorted = Presorted::new(data);
    train_tree_presorted(data, &presorted, sample_weights, params, rng)
}

pub fn train_tree_presorted<R: Rng>(
    data: &Dataset,
    presorted: &Presorted,
    sample_weights: &[f64],
    params: TreeParams,
    rng: &mut R,
) -> Result<TreeNode, ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if sample_weights.len() != data.n_rows() {
        return Err(ClassifierError::FeatureDimensionMismatch {
            expected: data.n_rows(),
            found: sample_weights.len(),
        });
    }
    if sample_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(ClassifierError::InvalidWeights);
    }
    let lists: Vec<Vec<u32>> = presorted
        .order
        .iter()
        .map(|o| o.iter().copied().filter(|&r| sample_weights[r as usize] > 0.0).collect())
        .collect();
    let n_active = lists.first().map(Vec::len).unwrap_or(0);
    if n_active == 0 {
        return Err(ClassifierError::InvalidWeights);
    }
    let n_features = data.n_features();
    let mut builder = Builder {
        data,
        weights: sample_weights,
        labels: data.labels(),
        params,
        lists,
        scratch: Vec::with_capacity(n_active),
        goes_left: vec![false; data.n_rows()],
        feature_pool: (0..n_features).collect(),
    };
    Ok(builder.grow(0, n_active, 0, rng))
}

struct Builder<'a> {
    data: &'a Dataset,
    weights: &'a [f64],
    labels: &'a [bool],
    params: TreeParams,
    lists: Vec<Vec<u32>>,
    scratch: Vec<u32>,
    goes_left: Vec<bool>,
    feature_pool: Vec<usize>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// `Σ_c w_c² / W`; larger is purer. Weighted Gini of a node is `W − purity`.
fn purity(pos: f64, neg: f64) -> f64 {
    let w = pos + neg;
    if w <= 0.0 {
        0.0
    } else {
        (pos * pos + neg * neg) / w
    }
}

impl Builder<'_> {
    fn node_weights(&self, lo: usize, hi: usize) -> (f64, f64) {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for &r in &self.lists[0][lo..hi] {
            let w = self.weights[r as usize];
            if self.labels[r as usize] {
                pos += w;
            } else {
                neg += w;
            }
        }
        (pos, neg)
    }

    fn choose_features<R: Rng>(&mut self, rng: &mut R) -> Vec<usize> {
        let d = self.feature_pool.len();
        let k = self.params.feature_subset_size.clamp(1, d);
        if k == d {
            return (0..d).collect();
        }
        for i in 0..k {
            let j = rng.random_range(i as u32..d as u32) as usize;
            self.feature_pool.swap(i, j);
        }
        let mut chosen = self.feature_pool[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }

    fn best_split(&self, features: &[usize], lo: usize, hi: usize, pos: f64, neg: f64) -> Option<Candidate> {
        let total = pos + neg;
        let tolerance = 1e-12 * total.max(f64::MIN_POSITIVE);
        let mut best: Option<Candidate> = None;
        for &f in features {
            let col = self.data.column(f);
            let list = &self.lists[f][lo..hi];
            let (mut lp, mut ln) = (0.0, 0.0);
            for k in 0..list.len() - 1 {
                let r = list[k] as usize;
                let w = self.weights[r];
                if self.labels[r] {
                    lp += w;
                } else {
                    ln += w;
                }
                let v = col[r];
                let next = col[list[k + 1] as usize];
                if next <= v {
                    continue;
                }
                let score = purity(lp, ln) + purity(pos - lp, neg - ln);
                if best.as_ref().is_none_or(|b| score > b.score + tolerance) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(Candidate {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }

    fn partition(&mut self, feature: usize, threshold: f64, lo: usize, hi: usize) -> usize {
        let col = self.data.column(feature);
        for &r in &self.lists[feature][lo..hi] {
            self.goes_left[r as usize] = col[r as usize] <= threshold;
        }
        let mut n_left = 0;
        for list in &mut self.lists {
            self.scratch.clear();
            let mut write = lo;
            for i in lo..hi {
                let r = list[i];
                if self.goes_left[r as usize] {
                    list[write] = r;
                    write += 1;
                } else {
                    self.scratch.push(r);
                }
            }
            n_left = write - lo;
            list[write..hi].copy_from_slice(&self.scratch);
        }
        n_left
    }

    fn grow<R: Rng>(&mut self, lo: usize, hi: usize, depth: usize, rng: &mut R) -> TreeNode {
        let (pos, neg) = self.node_weights(lo, hi);
        let total = pos + neg;
        let leaf = TreeNode::Leaf {
            positive_fraction: if total > 0.0 { pos / total } else { 0.0 },
            n_samples: hi - lo,
        };
        if depth >= self.params.max_depth || pos <= 0.0 || neg <= 0.0 || hi - lo < 2 {
            return leaf;
        }
        let features = self.choose_features(rng);
        let Some(best) = self.best_split(&features, lo, hi, pos, neg) else {
            return leaf;
        };
        let decrease = best.score - purity(pos, neg);
        if decrease <= 1e-12 * total {
            return leaf;
        }
        let n_left = self.partition(best.feature, best.threshold, lo, hi);
        let left = self.grow(lo, lo + n_left, depth + 1, rng);
        let right = self.grow(lo + n_left, hi, depth + 1, rng);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            impurity_decrease: decrease,
            weight: total,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}
