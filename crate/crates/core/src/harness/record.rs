use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Outcome of one seeded run. `task` is free text so externally recorded
/// tasks (for example one performed without the device) can be aggregated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub task: String,
    pub seed: u64,
    /// `None` for tasks performed without the device.
    pub device_success: Option<bool>,
    pub pilot_success: bool,
    pub duration_s: f64,
    pub failure_reason: Option<String>,
}

const HEADER: [&str; 6] = [
    "task",
    "seed",
    "device_success",
    "pilot_success",
    "duration_s",
    "failure_reason",
];

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), HarnessError> {
    let internal = |e: csv::Error| HarnessError::Internal(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(internal)?;
    for r in records {
        let device = r.device_success.map_or("NA", flag);
        let seed = r.seed.to_string();
        let duration = format!("{:.3}", r.duration_s);
        let reason = r.failure_reason.as_deref().unwrap_or("");
        w.write_record([r.task.as_str(), &seed, device, flag(r.pilot_success), &duration, reason])
            .map_err(internal)?;
    }
    w.flush().map_err(|e| HarnessError::Internal(e.to_string()))
}

fn parse_flag(s: &str, line: u64, column: &str) -> Result<bool, HarnessError> {
    match s.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(HarnessError::schema(
            format!("line {line}"),
            format!("{column}: expected 0 or 1, got {other:?}"),
        )),
    }
}

/// Reads a results CSV written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| HarnessError::schema("header", e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(HarnessError::schema(
            "header",
            format!("expected columns {}", HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| HarnessError::schema("csv", e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let at = || format!("line {line}");
        let seed = row[1]
            .trim()
            .parse::<u64>()
            .map_err(|e| HarnessError::schema(at(), format!("seed: {e}")))?;
        let device_success = match row[2].trim() {
            "NA" | "" => None,
            s => Some(parse_flag(s, line, "device_success")?),
        };
        let pilot_success = parse_flag(&row[3], line, "pilot_success")?;
        let duration_s: f64 = row[4]
            .trim()
            .parse()
            .map_err(|e| HarnessError::schema(at(), format!("duration_s: {e}")))?;
        if !(duration_s.is_finite() && duration_s >= 0.0) {
            return Err(HarnessError::schema(at(), "duration_s must be a non-negative number"));
        }
        let reason = row[5].to_string();
        out.push(RunRecord {
            task: row[0].to_string(),
            seed,
            device_success,
            pilot_success,
            duration_s,
            failure_reason: (!reason.is_empty()).then_some(reason),
        });
    }
    Ok(out)
}
