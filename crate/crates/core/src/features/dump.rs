//! Feature dump: one CSV row per chunk with its start, warm-up flag, the
//! twelve features and, when known, the label.

use std::io::{Read, Write};

use crate::features::ChunkFeatures;
use crate::ingest::IngestError;
use crate::trade::{FeatureVector, Millis, FEATURE_NAMES, N_FEATURES};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub chunk_start: Millis,
    pub warm_up: bool,
    pub features: FeatureVector,
    pub label: Option<bool>,
}

impl From<&ChunkFeatures> for FeatureRow {
    fn from(c: &ChunkFeatures) -> Self {
        FeatureRow {
            chunk_start: c.chunk.start,
            warm_up: c.warm_up,
            features: c.features,
            label: None,
        }
    }
}

pub fn write_feature_csv<W: Write>(rows: &[FeatureRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["chunk_start", "warm_up"];
    header.extend(FEATURE_NAMES);
    header.push("label");
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.chunk_start.to_string(), (r.warm_up as u8).to_string()];
        rec.extend(r.features.to_array().iter().map(|v| v.to_string()));
        rec.push(r.label.map(|l| (l as u8).to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<FeatureRow>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header_ok = reader
        .headers()
        .map(|h| h.len() >= 2 + N_FEATURES && &h[0] == "chunk_start")
        .unwrap_or(false);
    if !header_ok {
        return Err(IngestError::Parse {
            row: 1,
            reason: "missing feature-file header".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| IngestError::Parse { row, reason: e.to_string() })?;
        let bad = |what: &str| IngestError::Parse {
            row,
            reason: format!("invalid {what}"),
        };
        if rec.len() < 2 + N_FEATURES {
            return Err(bad("field count"));
        }
        let chunk_start: Millis = rec[0].parse().map_err(|_| bad("chunk_start"))?;
        let warm_up = parse_flag(&rec[1]).ok_or_else(|| bad("warm_up"))?;
        let mut values = [0.0; N_FEATURES];
        for (k, v) in values.iter_mut().enumerate() {
            *v = rec[2 + k].parse().map_err(|_| bad(FEATURE_NAMES[k]))?;
        }
        let label = match rec.get(2 + N_FEATURES).map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(parse_flag(s).ok_or_else(|| bad("label"))?),
        };
        rows.push(FeatureRow {
            chunk_start,
            warm_up,
            features: FeatureVector::from_array(values),
            label,
        });
    }
    Ok(rows)
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}
