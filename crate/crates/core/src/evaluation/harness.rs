use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{
    train_adaboost, train_forest, BoostConfig, Dataset, FeatureMask, ForestConfig, Model, ModelFile,
};
use crate::detectors::{candles_from_chunks, detect_kamps, detect_stream, detect_threshold, KampsConfig};
use crate::evaluation::metrics::{match_alerts, Confusion, EvalReport, FoldScore};
use crate::evaluation::{label_slice, EvalError, LabeledSeries, Slice};
use crate::features::WindowConfig;
use crate::trade::AlertEvent;

/// A detector together with everything needed to train it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "detector")]
pub enum DetectorSpec {
    RandomForest {
        forest: ForestConfig,
        mask: FeatureMask,
        cooldown_secs: u32,
    },
    AdaBoost {
        boost: BoostConfig,
        mask: FeatureMask,
        cooldown_secs: u32,
    },
    Threshold {
        threshold: f64,
        cooldown_secs: u32,
    },
    Kamps {
        kamps: KampsConfig,
    },
}

impl DetectorSpec {
    pub fn name(&self) -> String {
        match self {
            DetectorSpec::RandomForest { .. } => "random_forest".into(),
            DetectorSpec::AdaBoost { .. } => "ada_boost".into(),
            DetectorSpec::Threshold { threshold, .. } => format!("threshold>{threshold}"),
            DetectorSpec::Kamps { kamps } => format!("kamps-{}", kamps.preset.as_str()),
        }
    }

    pub fn is_trained(&self) -> bool {
        matches!(self, DetectorSpec::RandomForest { .. } | DetectorSpec::AdaBoost { .. })
    }

    /// The chunking this detector scores on. Candle detectors use their
    /// candle size; the window length is irrelevant to them.
    pub fn chunking(&self, window: &WindowConfig) -> Result<WindowConfig, EvalError> {
        match self {
            DetectorSpec::Kamps { kamps } => {
                Ok(WindowConfig::new(kamps.candle_seconds, kamps.candle_seconds * kamps.window_candles as u32)?)
            }
            _ => Ok(*window),
        }
    }
}

/// How fold scores combine into the total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Pool confusion counts over folds, then score.
    #[default]
    Micro,
    /// Mean of the per-fold scores.
    Macro,
}

impl Averaging {
    pub fn as_str(self) -> &'static str {
        match self {
            Averaging::Micro => "micro",
            Averaging::Macro => "macro",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub window: WindowConfig,
    pub folds: usize,
    pub seed: u64,
    pub tolerance_chunks: usize,
    #[serde(default)]
    pub averaging: Averaging,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            window: WindowConfig::best_f1(),
            folds: 5,
            seed: 0,
            tolerance_chunks: 2,
            averaging: Averaging::Micro,
        }
    }
}

/// Featurizes and labels every slice.
pub fn prepare(slices: &[Slice], window: &WindowConfig) -> Result<Vec<LabeledSeries>, EvalError> {
    slices.par_iter().map(|s| label_slice(s, window)).collect()
}

/// Non-warm-up chunks of `series`, restricted to the features in `mask`.
pub fn training_set<'a>(series: impl IntoIterator<Item = &'a LabeledSeries>, mask: FeatureMask) -> Dataset {
    let mut d = Dataset::new(mask.names());
    for s in series {
        for (row, &label) in s.rows.iter().zip(&s.labels) {
            if !row.warm_up {
                d.push(&mask.select(&row.features), label).expect("features are finite");
            }
        }
    }
    d
}

/// Trains the model of a trainable spec; `None` for rule-based ones.
pub fn train_model(
    spec: &DetectorSpec,
    train: &[&LabeledSeries],
    window: &WindowConfig,
    seed: u64,
) -> Result<Option<ModelFile>, EvalError> {
    let (model, mask) = match spec {
        DetectorSpec::RandomForest { forest, mask, .. } => {
            let data = training_set(train.iter().copied(), *mask);
            (Model::RandomForest(train_forest(&data, forest, seed)?), *mask)
        }
        DetectorSpec::AdaBoost { boost, mask, .. } => {
            let data = training_set(train.iter().copied(), *mask);
            (Model::AdaBoost(train_adaboost(&data, boost, seed)?), *mask)
        }
        _ => return Ok(None),
    };
    Ok(Some(ModelFile::new(model, mask, Some(*window))?))
}

/// Runs a detector over one series. Trained specs need `model`.
pub fn run_detector(spec: &DetectorSpec, model: Option<&Arc<ModelFile>>, series: &LabeledSeries) -> Vec<AlertEvent> {
    match spec {
        DetectorSpec::RandomForest { cooldown_secs, .. } | DetectorSpec::AdaBoost { cooldown_secs, .. } => {
            let model = model.expect("trained spec needs a model").clone();
            detect_stream(&series.pair, &series.rows, model, *cooldown_secs)
        }
        DetectorSpec::Threshold {
            threshold,
            cooldown_secs,
        } => detect_threshold(&series.pair, &series.rows, *threshold, *cooldown_secs),
        DetectorSpec::Kamps { kamps } => {
            let chunks: Vec<_> = series.rows.iter().map(|r| r.chunk.clone()).collect();
            detect_kamps(&series.pair, &candles_from_chunks(&chunks), kamps)
        }
    }
}

/// Trains on `train` (if needed) and scores `test`.
pub fn evaluate_split(
    spec: &DetectorSpec,
    train: &[&LabeledSeries],
    test: &[&LabeledSeries],
    opts: &EvalOptions,
) -> Result<(Confusion, Vec<usize>), EvalError> {
    let window = spec.chunking(&opts.window)?;
    let model = train_model(spec, train, &window, opts.seed)?.map(Arc::new);
    let outcomes: Vec<_> = test
        .par_iter()
        .map(|s| match_alerts(s, &run_detector(spec, model.as_ref(), s), opts.tolerance_chunks))
        .collect();
    let mut confusion = Confusion::default();
    let mut latencies = Vec::new();
    for o in outcomes {
        confusion += o.confusion;
        latencies.extend(o.latencies);
    }
    Ok((confusion, latencies))
}

/// Fold of each of `n` series: a seeded shuffle dealt round-robin, so fold
/// sizes differ by at most one.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        fold[i] = k % folds.max(1);
    }
    fold
}

/// k-fold cross-validation over merged slices: no slice is ever in both
/// the training and test side of a fold. Rule-based detectors are scored
/// fold by fold without training.
pub fn kfold_evaluate(slices: &[Slice], spec: &DetectorSpec, opts: &EvalOptions) -> Result<EvalReport, EvalError> {
    let needed = if spec.is_trained() { opts.folds.max(2) } else { 1 };
    let n_events: usize = slices.iter().map(|s| s.signals.len()).sum();
    if n_events < needed || slices.len() < needed {
        return Err(EvalError::TooFewEvents { needed, found: n_events });
    }
    let window = spec.chunking(&opts.window)?;
    let series = prepare(slices, &window)?;
    let folds = opts.folds.clamp(1, series.len());
    let assign = fold_assignment(series.len(), folds, opts.seed);
    let mut scores = Vec::new();
    let mut total = Confusion::default();
    let mut latencies = Vec::new();
    for f in 0..folds {
        let (test, train): (Vec<_>, Vec<_>) = series.iter().enumerate().partition(|(i, _)| assign[*i] == f);
        let test: Vec<&LabeledSeries> = test.into_iter().map(|(_, s)| s).collect();
        let train: Vec<&LabeledSeries> = train.into_iter().map(|(_, s)| s).collect();
        let (c, l) = evaluate_split(spec, &train, &test, opts)?;
        scores.push(FoldScore::new(f, test.iter().map(|s| s.n_events()).sum(), c));
        total += c;
        latencies.extend(l);
    }
    let mut total = FoldScore::new(folds, n_events, total);
    if opts.averaging == Averaging::Macro {
        let mean = |f: fn(&FoldScore) -> f64| scores.iter().map(f).sum::<f64>() / scores.len() as f64;
        total.precision = mean(|s| s.precision);
        total.recall = mean(|s| s.recall);
        total.f1 = mean(|s| s.f1);
    }
    Ok(EvalReport {
        detector: spec.name(),
        config_fingerprint: fingerprint(spec, opts),
        chunk_seconds: window.chunk_seconds,
        match_tolerance_chunks: opts.tolerance_chunks,
        averaging: opts.averaging.as_str().into(),
        folds: scores,
        total,
        latencies,
    })
}

/// First 16 hex digits of the SHA-256 of the detector and options JSON.
pub fn fingerprint(spec: &DetectorSpec, opts: &EvalOptions) -> String {
    let json = serde_json::to_vec(&(spec, opts)).expect("spec serializes");
    hex::encode(Sha256::digest(&json))[..16].to_string()
}
