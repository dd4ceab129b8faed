use std::io::{BufRead, Write};

use crate::detectors::DetectorError;
use crate::trade::{AlertEvent, AlertRecord};

/// One JSON object per line.
pub fn write_alerts<W: Write>(alerts: &[AlertEvent], mut out: W) -> std::io::Result<()> {
    for a in alerts {
        serde_json::to_writer(&mut out, &AlertRecord::from(a))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_alerts<R: BufRead>(input: R) -> Result<Vec<AlertEvent>, DetectorError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AlertRecord =
            serde_json::from_str(&line).map_err(|source| DetectorError::AlertParse { line: i + 1, source })?;
        out.push(rec.into());
    }
    Ok(out)
}
