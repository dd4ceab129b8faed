use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierError;
use crate::trade::{FeatureVector, FEATURE_NAMES, TIME_FEATURES};

/// Column-major labeled feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    labels: Vec<bool>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>) -> Self {
        Dataset {
            columns: vec![Vec::new(); feature_names.len()],
            labels: Vec::new(),
            feature_names,
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(
        feature_names: Vec<String>,
        rows: &[R],
        labels: &[bool],
    ) -> Result<Self, ClassifierError> {
        let mut d = Dataset::new(feature_names);
        if rows.len() != labels.len() {
            return Err(ClassifierError::FeatureDimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        for (r, &l) in rows.iter().zip(labels) {
            d.push(r.as_ref(), l)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, row: &[f64], label: bool) -> Result<(), ClassifierError> {
        if row.len() != self.columns.len() {
            return Err(ClassifierError::FeatureDimensionMismatch {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(ClassifierError::NonFiniteFeature {
                row: self.labels.len(),
                feature: bad,
            });
        }
        for (col, &v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
        self.labels.push(label);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn column(&self, f: usize) -> &[f64] {
        &self.columns[f]
    }

    pub fn value(&self, row: usize, f: usize) -> f64 {
        self.columns[f][row]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Applies `f` to each value of one column.
    pub fn map_column(&mut self, feature: usize, f: impl Fn(f64) -> f64) {
        for v in &mut self.columns[feature] {
            *v = f(*v);
        }
    }

    /// Per-row base weight for the chosen class weighting.
    pub fn class_weights(&self, weighting: ClassWeighting) -> Vec<f64> {
        let n = self.n_rows() as f64;
        let pos = self.n_positive() as f64;
        let neg = n - pos;
        let (wp, wn) = match weighting {
            ClassWeighting::None => (1.0, 1.0),
            ClassWeighting::Balanced if pos == 0.0 || neg == 0.0 => (1.0, 1.0),
            ClassWeighting::Balanced => (n / (2.0 * pos), n / (2.0 * neg)),
        };
        self.labels.iter().map(|&l| if l { wp } else { wn }).collect()
    }
}

/// How training offsets class imbalance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    None,
    /// Each class carries half the total weight.
    #[default]
    Balanced,
}

/// Which chunk features a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMask {
    #[default]
    All,
    /// Drops the four time-of-day encodings.
    NoTime,
}

impl FeatureMask {
    pub fn indices(self) -> Vec<usize> {
        (0..FEATURE_NAMES.len())
            .filter(|i| self == FeatureMask::All || !TIME_FEATURES.contains(i))
            .collect()
    }

    pub fn names(self) -> Vec<String> {
        self.indices().into_iter().map(|i| FEATURE_NAMES[i].to_string()).collect()
    }

    pub fn select(self, f: &FeatureVector) -> Vec<f64> {
        let a = f.to_array();
        self.indices().into_iter().map(|i| a[i]).collect()
    }
}
