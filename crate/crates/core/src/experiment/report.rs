//! Report records, summaries and their JSON / CSV serializations.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{Settings, SCHEMA_VERSION};
use crate::error::Result;
use crate::stats::{median, quantile};
use crate::symplectic::Frame;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Informational only; never fails the run.
    Reported,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One trial. Rerunning with `RngStream::new(seed, stream_id)` and the same
/// shared clouds reproduces it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: usize,
    pub stream_id: u64,
    pub subspace_frame: Option<Vec<Vec<f64>>>,
    pub estimates: BTreeMap<String, f64>,
    pub flags: Vec<String>,
}

impl TrialRecord {
    pub fn new(trial_id: usize, stream_id: u64) -> Self {
        Self {
            trial_id,
            stream_id,
            ..Self::default()
        }
    }

    pub fn with_frame(mut self, frame: &Frame) -> Self {
        self.subspace_frame = Some(frame.vectors().to_vec());
        self
    }

    /// Stores finite values; a non-finite one becomes a flag instead.
    pub fn set(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.estimates.insert(key.to_string(), value);
        } else {
            self.flag(format!("non_finite:{key}"));
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.estimates.get(key).copied()
    }

    pub fn flag<S: Into<String>>(&mut self, flag: S) {
        self.flags.push(flag.into());
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// The estimate key the order statistics are taken over.
    pub statistic: String,
    pub count: usize,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub pass_fraction: Option<f64>,
}

impl Summary {
    /// Order statistics of `statistic` over the records that carry it;
    /// `pass_fraction` over the records carrying `pass_key` (1 = pass).
    pub fn of(records: &[TrialRecord], statistic: &str, pass_key: Option<&str>) -> Self {
        let values: Vec<f64> = records.iter().filter_map(|r| r.get(statistic)).collect();
        let pass_fraction = pass_key.and_then(|k| {
            let flags: Vec<f64> = records.iter().filter_map(|r| r.get(k)).collect();
            (!flags.is_empty()).then(|| flags.iter().sum::<f64>() / flags.len() as f64)
        });
        Self {
            statistic: statistic.to_string(),
            count: values.len(),
            median: median(&values),
            q1: quantile(&values, 0.25),
            q3: quantile(&values, 0.75),
            pass_fraction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: Settings,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
    pub verdicts: BTreeMap<String, Verdict>,
    pub notes: Vec<String>,
    /// Wall-clock seconds per named stage; excluded from reproducibility.
    pub timings: BTreeMap<String, f64>,
    pub runtime_seconds: f64,
    pub version: String,
}

impl ExperimentReport {
    pub fn new(config: Settings) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            trials: vec![],
            summary: Summary::default(),
            verdicts: BTreeMap::new(),
            notes: vec![],
            timings: BTreeMap::new(),
            runtime_seconds: 0.0,
            version: crate::VERSION.to_string(),
        }
    }

    /// No verdict is `fail`.
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| *v != Verdict::Fail)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The JSON with the timing fields zeroed, for reproducibility checks.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut r = self.clone();
        r.runtime_seconds = 0.0;
        r.timings.clear();
        r.to_json()
    }

    /// One row per trial with dotted column names (`estimates.dim`,
    /// `subspace_frame.0.3`, ...); columns are the union over all trials.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<BTreeMap<String, String>> = self.trials.iter().map(flatten_trial).collect();
        let mut columns: Vec<String> = vec!["trial_id".into(), "stream_id".into()];
        let mut rest: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
        for row in &rows {
            rest.extend(row.keys().filter(|k| *k != "trial_id" && *k != "stream_id").cloned());
        }
        columns.extend(rest);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&columns)?;
        for row in &rows {
            w.write_record(columns.iter().map(|c| row.get(c).map(String::as_str).unwrap_or("")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

fn flatten_trial(t: &TrialRecord) -> BTreeMap<String, String> {
    let mut row = BTreeMap::new();
    row.insert("trial_id".into(), t.trial_id.to_string());
    row.insert("stream_id".into(), t.stream_id.to_string());
    if let Some(frame) = &t.subspace_frame {
        for (i, v) in frame.iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                row.insert(format!("subspace_frame.{i}.{j}"), x.to_string());
            }
        }
    }
    for (k, v) in &t.estimates {
        row.insert(format!("estimates.{k}"), v.to_string());
    }
    row.insert("flags".into(), t.flags.join(";"));
    row
}
