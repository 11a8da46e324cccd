use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::sampler::{ENCODING_VERSION, GENERATOR_NAME};
use crate::stats::EstimateResult;

/// Bumped whenever the JSON record or CSV row layout changes.
/// 1: initial layout.
pub const SCHEMA_VERSION: u32 = 1;

/// One point of a sweep. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
    pub successes: u64,
}

impl SweepRow {
    pub fn new(axis_value: f64, r: &EstimateResult) -> Self {
        SweepRow {
            axis_value,
            estimate: r.estimate,
            ci_lo: r.ci[0],
            ci_hi: r.ci[1],
            trials: r.trials,
            successes: r.successes,
        }
    }
}

/// Timing and environment. Everything that may differ between two runs of
/// the same config lives here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub wall_time_ms: u128,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub generator: String,
    pub encoding_version: u8,
    pub operation: String,
    pub config: ExperimentConfig,
    pub payload: Value,
    pub rows: Vec<SweepRow>,
    pub meta: RunMeta,
}

pub(crate) fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

pub(crate) fn generator_version() -> String {
    format!("{GENERATOR_NAME}/v{ENCODING_VERSION}")
}

impl ResultRecord {
    pub(crate) fn new(
        operation: &str,
        config: &ExperimentConfig,
        payload: Value,
        rows: Vec<SweepRow>,
        meta: RunMeta,
    ) -> Self {
        let mut config = config.clone();
        // output locations are not part of the experiment
        config.out = None;
        config.csv = None;
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            generator: GENERATOR_NAME.to_string(),
            encoding_version: ENCODING_VERSION,
            operation: operation.to_string(),
            config,
            payload,
            rows,
            meta,
        }
    }

    /// The record without `meta`, serialized. Identical for identical
    /// configs regardless of machine, time or thread count.
    pub fn payload_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        if let Value::Object(map) = &mut v {
            map.remove("meta");
        }
        serde_json::to_string_pretty(&v).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_rows(&self.rows, path)
    }
}

pub fn write_rows(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(Error::Csv(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Csv(format!("{}: {other:?}", path.display())),
        }
    } else {
        Error::Csv(format!("{}: {e}", path.display()))
    }
}
