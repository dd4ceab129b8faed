use serde::{Deserialize, Serialize};

use crate::classifiers::{average_precision, pr_threshold_select, PrSelection, ThresholdPolicy};
use crate::evaluation::harness::{fold_assignment, prepare, EvalOptions};
use crate::evaluation::metrics::{match_alerts, Confusion};
use crate::evaluation::{EvalError, LabeledSeries, Slice};
use crate::detectors::detect_threshold;

/// Result of fitting the rush-order threshold on one half of the events and
/// applying it to the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdStudy {
    pub selection: PrSelection,
    pub average_precision: f64,
    pub train_events: usize,
    pub test_events: usize,
    pub test: Confusion,
}

/// `(std_rush_orders, label)` for the non-warm-up chunks of `series`.
pub fn rush_scores<'a>(series: impl IntoIterator<Item = &'a LabeledSeries>) -> Vec<(f64, bool)> {
    series
        .into_iter()
        .flat_map(|s| {
            s.rows
                .iter()
                .zip(&s.labels)
                .filter(|(r, _)| !r.warm_up)
                .map(|(r, &l)| (r.features.std_rush_orders, l))
        })
        .collect()
}

pub fn rush_threshold_study(
    slices: &[Slice],
    policy: ThresholdPolicy,
    cooldown_secs: u32,
    opts: &EvalOptions,
) -> Result<ThresholdStudy, EvalError> {
    let series = prepare(slices, &opts.window)?;
    if series.len() < 2 {
        return Err(EvalError::TooFewEvents {
            needed: 2,
            found: series.iter().map(|s| s.n_events()).sum(),
        });
    }
    let half = fold_assignment(series.len(), 2, opts.seed);
    let train: Vec<&LabeledSeries> = series.iter().zip(&half).filter(|(_, &h)| h == 0).map(|(s, _)| s).collect();
    let test: Vec<&LabeledSeries> = series.iter().zip(&half).filter(|(_, &h)| h == 1).map(|(s, _)| s).collect();
    let selection = pr_threshold_select(&rush_scores(train.iter().copied()), policy)?;
    let mut conf = Confusion::default();
    for s in &test {
        let alerts = detect_threshold(&s.pair, &s.rows, selection.strict_cut, cooldown_secs);
        conf += match_alerts(s, &alerts, opts.tolerance_chunks).confusion;
    }
    Ok(ThresholdStudy {
        average_precision: average_precision(&selection.curve),
        train_events: train.iter().map(|s| s.n_events()).sum(),
        test_events: test.iter().map(|s| s.n_events()).sum(),
        selection,
        test: conf,
    })
}
