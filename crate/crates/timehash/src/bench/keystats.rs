//! Exhaustive key counts over every range of the day.

use rayon::prelude::*;

use super::Tabular;
use crate::hierarchy::{Hierarchy, DAY_MINUTES};
use crate::keygen::index_key_count;
use crate::time::TimeRange;

/// Bucket labels and inclusive upper length bounds in minutes.
pub const BUCKETS: [(&str, u32); 4] = [("<1h", 60), ("1-4h", 240), ("4-12h", 720), ("12-24h", 1440)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketStats {
    pub ranges: u64,
    pub total_keys: u64,
    pub min: u32,
    pub max: u32,
}

impl Default for BucketStats {
    fn default() -> Self {
        BucketStats {
            ranges: 0,
            total_keys: 0,
            min: u32::MAX,
            max: 0,
        }
    }
}

impl BucketStats {
    fn add(&mut self, keys: u32) {
        self.ranges += 1;
        self.total_keys += keys as u64;
        self.min = self.min.min(keys);
        self.max = self.max.max(keys);
    }

    fn merge(mut self, other: BucketStats) -> Self {
        self.ranges += other.ranges;
        self.total_keys += other.total_keys;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self
    }

    pub fn avg(&self) -> f64 {
        if self.ranges == 0 {
            0.0
        } else {
            self.total_keys as f64 / self.ranges as f64
        }
    }
}

/// Key counts over all `0 <= start < end <= 1440`. Zero-length ranges have no
/// keys and are not counted; every range weighs the same.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyStats {
    pub hierarchy: Hierarchy,
    pub buckets: [BucketStats; 4],
    pub overall: BucketStats,
}

fn bucket_of(len: u32) -> usize {
    BUCKETS.iter().position(|&(_, upper)| len <= upper).expect("len <= 1440")
}

pub fn enumerate_key_stats(h: &Hierarchy) -> KeyStats {
    let buckets = (0..DAY_MINUTES)
        .into_par_iter()
        .map(|start| {
            let mut local = [BucketStats::default(); 4];
            for end in start + 1..=DAY_MINUTES {
                let range = TimeRange::minutes(start, end).expect("in day");
                local[bucket_of(end - start)].add(index_key_count(range, h) as u32);
            }
            local
        })
        .reduce(
            || [BucketStats::default(); 4],
            |a, b| std::array::from_fn(|i| a[i].merge(b[i])),
        );
    let overall = buckets.iter().fold(BucketStats::default(), |acc, b| acc.merge(*b));
    KeyStats {
        hierarchy: h.clone(),
        buckets,
        overall,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub hierarchy: Hierarchy,
    pub avg_keys: f64,
    pub max_keys: u32,
    /// Relative to the base hierarchy, in percent.
    pub delta_pct: f64,
}

/// Overall average key count per hierarchy; the first row is `base`.
pub fn ablation(base: &Hierarchy, variants: &[Hierarchy]) -> Vec<AblationRow> {
    let base_stats = enumerate_key_stats(base).overall;
    let base_avg = base_stats.avg();
    let mut rows = vec![AblationRow {
        hierarchy: base.clone(),
        avg_keys: base_avg,
        max_keys: base_stats.max,
        delta_pct: 0.0,
    }];
    rows.extend(variants.iter().map(|h| {
        let stats = enumerate_key_stats(h).overall;
        AblationRow {
            hierarchy: h.clone(),
            avg_keys: stats.avg(),
            max_keys: stats.max,
            delta_pct: (stats.avg() / base_avg - 1.0) * 100.0,
        }
    }));
    rows
}

/// One row per bucket plus `overall`.
impl KeyStats {
    pub fn rows(&self) -> Vec<KeyStatsRow> {
        BUCKETS
            .iter()
            .zip(self.buckets.iter())
            .map(|(&(label, _), stats)| (label, *stats))
            .chain(std::iter::once(("overall", self.overall)))
            .map(|(label, stats)| KeyStatsRow {
                hierarchy: self.hierarchy.to_string(),
                bucket: label,
                stats,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct KeyStatsRow {
    hierarchy: String,
    bucket: &'static str,
    stats: BucketStats,
}

impl Tabular for KeyStatsRow {
    const EXPERIMENT: &'static str = "keystats";
    fn columns() -> &'static [&'static str] {
        &["ranges", "avg_keys", "min_keys", "max_keys"]
    }
    fn label(&self) -> String {
        self.bucket.to_string()
    }
    fn config(&self) -> String {
        format!("hierarchy={}", self.hierarchy)
    }
    fn values(&self) -> Vec<f64> {
        let s = &self.stats;
        vec![s.ranges as f64, s.avg(), s.min as f64, s.max as f64]
    }
}

impl Tabular for AblationRow {
    const EXPERIMENT: &'static str = "ablation";
    fn columns() -> &'static [&'static str] {
        &["avg_keys", "max_keys", "delta_pct"]
    }
    fn label(&self) -> String {
        self.hierarchy.to_string()
    }
    fn config(&self) -> String {
        format!("hierarchy={}", self.hierarchy)
    }
    fn values(&self) -> Vec<f64> {
        vec![self.avg_keys, self.max_keys as f64, self.delta_pct]
    }
}
