use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value >= tolerance }
    }

    pub fn exact(name: &str, pass: bool) -> Self {
        Self { name: name.into(), value: if pass { 1.0 } else { 0.0 }, tolerance: 1.0, pass }
    }
}

/// Rows of one plottable table; column names live in [`super::plot`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub rows: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub kind: ExperimentKind,
    pub config_digest: String,
    pub seed: u64,
    pub version: String,
    pub outputs: BTreeMap<String, Value>,
    pub series: BTreeMap<String, Series>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_clock_ms: u64,
    pub workers: usize,
}

/// SHA-256 of the configuration with the worker count normalized, so runs
/// that differ only in parallelism share a digest.
pub fn config_digest(config: &ExperimentConfig) -> Result<String> {
    let mut normalized = config.clone();
    normalized.workers = 1;
    let json = serde_json::to_vec(&serde_json::to_value(&normalized)?)?;
    Ok(Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect())
}

impl ResultRecord {
    /// Everything except wall-clock time and worker count, as canonical JSON.
    pub fn payload(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(map) = &mut v {
            map.remove("wall_clock_ms");
            map.remove("workers");
        }
        Ok(serde_json::to_string(&v)?)
    }

    pub fn to_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

pub fn write_records<W: Write>(mut w: W, records: &[ResultRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_line()?)?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(r: R) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(ResultRecord::from_line(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}
