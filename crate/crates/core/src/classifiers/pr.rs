//! Precision-recall curves and operating-point selection.

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierError;

/// Classification at `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl PrPoint {
    pub fn f1(&self) -> f64 {
        f1(self.precision, self.recall)
    }
}

pub(crate) fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum ThresholdPolicy {
    #[default]
    MaxF1,
    /// Highest recall whose precision is at least the floor.
    PrecisionFloor(f64),
    /// Highest precision whose recall is at least the floor.
    RecallFloor(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrSelection {
    pub chosen: PrPoint,
    /// A cut `c` such that `score > c` classifies exactly like
    /// `score >= chosen.threshold` on the input scores.
    pub strict_cut: f64,
    pub curve: Vec<PrPoint>,
}

/// One point per distinct score, thresholds ascending.
pub fn pr_curve(scores: &[(f64, bool)]) -> Result<Vec<PrPoint>, ClassifierError> {
    let total_pos = scores.iter().filter(|s| s.1).count();
    if total_pos == 0 || total_pos == scores.len() {
        return Err(ClassifierError::SingleClassInput);
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut curve = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        curve.push(PrPoint {
            threshold: t,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / total_pos as f64,
            tp,
            fp,
            fn_: total_pos - tp,
        });
    }
    curve.reverse();
    Ok(curve)
}

/// Step-wise area under the curve, `Σ (R_k − R_{k+1}) · P_k`.
pub fn average_precision(curve: &[PrPoint]) -> f64 {
    let mut ap = 0.0;
    for (k, p) in curve.iter().enumerate() {
        let next = curve.get(k + 1).map_or(0.0, |q| q.recall);
        ap += (p.recall - next) * p.precision;
    }
    ap
}

/// Builds the curve and picks the operating point; ties go to the higher
/// threshold.
pub fn pr_threshold_select(scores: &[(f64, bool)], policy: ThresholdPolicy) -> Result<PrSelection, ClassifierError> {
    let curve = pr_curve(scores)?;
    let key = |p: &PrPoint| -> Option<f64> {
        match policy {
            ThresholdPolicy::MaxF1 => Some(p.f1()),
            ThresholdPolicy::PrecisionFloor(f) => (p.precision >= f).then_some(p.recall),
            ThresholdPolicy::RecallFloor(f) => (p.recall >= f).then_some(p.precision),
        }
    };
    let mut best: Option<(usize, f64)> = None;
    for (k, p) in curve.iter().enumerate() {
        if let Some(v) = key(p) {
            if best.is_none_or(|(_, b)| v >= b) {
                best = Some((k, v));
            }
        }
    }
    let (k, _) = best.ok_or_else(|| ClassifierError::PolicyUnsatisfiable(format!("{policy:?}")))?;
    let chosen = curve[k];
    let strict_cut = match k.checked_sub(1) {
        Some(j) => {
            let lo = curve[j].threshold;
            let mid = lo + (chosen.threshold - lo) / 2.0;
            if mid > lo && mid < chosen.threshold { mid } else { lo }
        }
        None => chosen.threshold.next_down(),
    };
    Ok(PrSelection {
        chosen,
        strict_cut,
        curve,
    })
}
