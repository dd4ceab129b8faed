use crate::classifiers::ForestModel;

/// Mean decrease in weighted Gini impurity per feature.
///
/// Each tree's decreases are divided by that tree's root weight before
/// averaging, so bootstrap trees of different total weight count equally.
/// The result sums to 1; a forest without any split yields uniform values.
pub fn gini_importance(model: &ForestModel) -> Vec<(String, f64)> {
    let d = model.feature_names.len();
    let mut total = vec![0.0; d];
    let mut tree_acc = vec![0.0; d];
    for tree in &model.trees {
        let Some(root) = tree.root_weight() else { continue };
        tree_acc.iter_mut().for_each(|v| *v = 0.0);
        tree.accumulate_importance(&mut tree_acc);
        for (t, a) in total.iter_mut().zip(&tree_acc) {
            *t += a / root;
        }
    }
    let sum: f64 = total.iter().sum();
    let values: Vec<f64> = if sum > 0.0 {
        total.iter().map(|v| v / sum).collect()
    } else {
        vec![1.0 / d.max(1) as f64; d]
    };
    model.feature_names.iter().cloned().zip(values).collect()
}

/// Feature names ordered from most to least important.
pub fn importance_ranking(importances: &[(String, f64)]) -> Vec<String> {
    let mut v = importances.to_vec();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.into_iter().map(|(n, _)| n).collect()
}
