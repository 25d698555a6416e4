//! Report records: JSON for the whole record, CSV for the per-trial rows.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One row of an experiment's per-trial dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub seed: u64,
    pub outcome: String,
    pub value: Option<f64>,
    pub detail: Option<String>,
}

impl TrialRecord {
    pub fn new(index: u64, seed: u64, outcome: impl Into<String>) -> Self {
        TrialRecord { index, seed, outcome: outcome.into(), value: None, detail: None }
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub experiment: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub trials: Vec<TrialRecord>,
    pub statistics: BTreeMap<String, f64>,
    /// Command-specific payload (a transcript, a table, ...).
    pub details: Option<serde_json::Value>,
    pub wall_clock_seconds: f64,
}

impl ReportRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The record with its wall-clock field zeroed, for comparing reruns.
    pub fn without_clock(&self) -> Self {
        ReportRecord { wall_clock_seconds: 0.0, ..self.clone() }
    }

    pub fn stat(&self, key: &str) -> Option<f64> {
        self.statistics.get(key).copied()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for t in &self.trials {
            w.serialize(t)?;
        }
        // an empty dump still gets its header
        if self.trials.is_empty() {
            w.write_record(["index", "seed", "outcome", "value", "detail"])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(fs::File::create(path)?)
    }
}

/// Reads a per-trial CSV dump back.
pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
