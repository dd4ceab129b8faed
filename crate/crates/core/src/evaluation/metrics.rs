use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifiers::pr::f1;
use crate::evaluation::LabeledSeries;
use crate::trade::AlertEvent;

/// Chunk-level confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }
}

impl std::ops::AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Alert-to-label matching result for one series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchOutcome {
    pub confusion: Confusion,
    /// Chunks from the labeled chunk to its first matching alert, per
    /// detected event.
    pub latencies: Vec<usize>,
}

/// An alert at chunk `a` detects the labeled chunk `l` when
/// `l <= a <= l + tolerance`. Each label is matched by at most one alert
/// (the earliest); all other alerts are false positives. Labels on warm-up
/// chunks are not scored.
pub fn match_alerts(series: &LabeledSeries, alerts: &[AlertEvent], tolerance: usize) -> MatchOutcome {
    let mut alert_idx: Vec<usize> = alerts.iter().filter_map(|a| series.index_of(a.chunk_start)).collect();
    alert_idx.sort_unstable();
    let labels: Vec<usize> = (0..series.rows.len())
        .filter(|&i| series.labels[i] && !series.rows[i].warm_up)
        .collect();
    let mut used = vec![false; alert_idx.len()];
    let mut out = MatchOutcome::default();
    for &l in &labels {
        let hit = alert_idx
            .iter()
            .enumerate()
            .find(|&(k, &a)| !used[k] && a >= l && a <= l + tolerance);
        match hit {
            Some((k, &a)) => {
                used[k] = true;
                out.confusion.tp += 1;
                out.latencies.push(a - l);
            }
            None => out.confusion.fn_ += 1,
        }
    }
    out.confusion.fp = used.iter().filter(|&&u| !u).count();
    let scored = series.rows.iter().filter(|r| !r.warm_up).count();
    out.confusion.tn = scored.saturating_sub(out.confusion.tp + out.confusion.fp + out.confusion.fn_);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub n_events: usize,
    pub confusion: Confusion,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl FoldScore {
    pub fn new(fold: usize, n_events: usize, confusion: Confusion) -> Self {
        FoldScore {
            fold,
            n_events,
            confusion,
            precision: confusion.precision(),
            recall: confusion.recall(),
            f1: confusion.f1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub detector: String,
    pub config_fingerprint: String,
    pub chunk_seconds: u32,
    pub match_tolerance_chunks: usize,
    /// `micro` or `macro`; the total's confusion counts are pooled either way.
    pub averaging: String,
    pub folds: Vec<FoldScore>,
    pub total: FoldScore,
    pub latencies: Vec<usize>,
}

impl EvalReport {
    pub fn precision(&self) -> f64 {
        self.total.precision
    }

    pub fn recall(&self) -> f64 {
        self.total.recall
    }

    pub fn f1(&self) -> f64 {
        self.total.f1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "detector {} ({}s chunks, tolerance {} chunks, config {})",
            self.detector, self.chunk_seconds, self.match_tolerance_chunks, self.config_fingerprint
        )?;
        writeln!(f, "{:>6} {:>7} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}", "fold", "events", "tp", "fp", "fn", "precision", "recall", "f1")?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, s: &FoldScore| {
            writeln!(
                f,
                "{:>6} {:>7} {:>6} {:>6} {:>6} {:>8.1}% {:>8.1}% {:>8.1}%",
                name,
                s.n_events,
                s.confusion.tp,
                s.confusion.fp,
                s.confusion.fn_,
                100.0 * s.precision,
                100.0 * s.recall,
                100.0 * s.f1
            )
        };
        for s in &self.folds {
            row(f, &s.fold.to_string(), s)?;
        }
        row(f, "all", &self.total)
    }
}
