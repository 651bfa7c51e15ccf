//! Experiment harness: key-count enumeration, ablation, index comparisons,
//! scalability, hierarchy sweep and oracle verification.
//!
//! Every experiment returns typed rows; [`BenchReport::from_rows`] turns them
//! into a table that can be written as CSV or JSON.

mod experiments;
mod keystats;
mod verify;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Duration;

use serde::Serialize;

pub use experiments::{
    end_to_end, hierarchy_sweep, index_size_comparison, sample_queries, scalability,
    EndToEndRow, IndexSizeRow, Method, ScaleError, ScaleRow, SweepRow, QUERY_WINDOW,
};
pub use keystats::{
    ablation, enumerate_key_stats, AblationRow, BucketStats, KeyStats, KeyStatsRow, BUCKETS,
};
pub use verify::{verify_exhaustive, verify_reduced_day, verify_sampled, VerifyReport};

/// A row type that can be rendered into a [`BenchReport`].
pub trait Tabular {
    const EXPERIMENT: &'static str;
    fn columns() -> &'static [&'static str];
    /// Short row name, e.g. a strategy or hierarchy.
    fn label(&self) -> String;
    /// Full configuration that produced the row.
    fn config(&self) -> String;
    fn values(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub config: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub env: BTreeMap<String, String>,
}

impl BenchReport {
    pub fn from_rows<T: Tabular>(rows: &[T], env: BTreeMap<String, String>) -> Self {
        BenchReport {
            experiment: T::EXPERIMENT.to_string(),
            columns: T::columns().iter().map(|c| c.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| ReportRow {
                    label: r.label(),
                    config: r.config(),
                    values: r.values(),
                })
                .collect(),
            env,
        }
    }

    pub fn get(&self, label: &str, column: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c == column)?;
        let row = self.rows.iter().find(|r| r.label == label)?;
        row.values.get(col).copied()
    }

    /// Header `label,config,<columns>`, one line per row.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["label".to_string(), "config".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.label.clone(), row.config.clone()];
            record.extend(row.values.iter().map(|v| format_value(*v)));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(out, self)
    }
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.6}")
    }
}

/// Metadata attached to every report.
pub fn env(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Nearest-rank percentile of an unsorted sample.
pub fn percentile(samples: &[Duration], p: f64) -> Duration {
    if samples.is_empty() {
        return Duration::ZERO;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}
