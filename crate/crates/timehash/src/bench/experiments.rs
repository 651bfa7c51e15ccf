//! Index comparisons over generated POIs.

use std::fmt;
use std::ops::Range;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{micros, millis, percentile, Tabular};
use crate::datagen::{generate, DatagenError, DistributionConfig};
use crate::hierarchy::Hierarchy;
use crate::index::{
    build_index, scope_filter_positions, DocId, IndexError, InvertedIndex, MatchCounts,
    PoiRecord, Strategy,
};
use crate::keygen::document_key_count;
use crate::time::MinuteOfDay;

/// Query minutes are drawn from 08:00 to 21:59.
pub const QUERY_WINDOW: Range<u32> = 480..1320;

/// Uniform point-query minutes over [`QUERY_WINDOW`].
pub fn sample_queries(count: usize, seed: u64) -> Vec<MinuteOfDay> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| MinuteOfDay::new(rng.gen_range(QUERY_WINDOW)).expect("in day"))
        .collect()
}

fn minute1_total(pois: &[PoiRecord]) -> u64 {
    pois.par_iter().map(|p| p.open_minutes() as u64).sum()
}

fn accuracy(index: &InvertedIndex, pois: &[PoiRecord], queries: &[MinuteOfDay]) -> Result<MatchCounts, IndexError> {
    let mut counts = MatchCounts::default();
    for &t in queries {
        let result = index.point_query(t)?;
        counts += MatchCounts::from_sorted(&result.docs, &scope_filter_positions(pois, t, None));
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexSizeRow {
    pub strategy: Strategy,
    pub hierarchy: Hierarchy,
    pub docs: usize,
    pub queries: usize,
    pub terms_per_doc: f64,
    pub total_terms: u64,
    pub unique_terms: usize,
    /// Relative to one term per open minute, in percent.
    pub reduction_pct: f64,
    pub precision: f64,
    pub recall: f64,
    pub memory_bytes: u64,
}

/// Builds one index per strategy and scores it against the scope filter.
pub fn index_size_comparison(
    pois: &[PoiRecord],
    strategies: &[Strategy],
    queries: &[MinuteOfDay],
    h: &Hierarchy,
) -> Result<Vec<IndexSizeRow>, IndexError> {
    let minute1 = minute1_total(pois) as f64;
    strategies
        .iter()
        .map(|&strategy| {
            let index = build_index(strategy, h, pois)?;
            let counts = accuracy(&index, pois, queries)?;
            let total = index.term_total();
            Ok(IndexSizeRow {
                strategy,
                hierarchy: h.clone(),
                docs: pois.len(),
                queries: queries.len(),
                terms_per_doc: total as f64 / pois.len().max(1) as f64,
                total_terms: total,
                unique_terms: index.unique_terms(),
                reduction_pct: if minute1 > 0.0 { (1.0 - total as f64 / minute1) * 100.0 } else { 0.0 },
                precision: counts.precision(),
                recall: counts.recall(),
                memory_bytes: index.memory_estimate_bytes(),
            })
        })
        .collect()
}

/// An index strategy or the linear scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Index(Strategy),
    ScopeFilter,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Index(s) => s.fmt(f),
            Method::ScopeFilter => f.write_str("scope_filter"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndRow {
    pub method: Method,
    pub hierarchy: Hierarchy,
    pub docs: usize,
    pub queries: usize,
    /// Fastest of the repeated builds; zero for the scope filter.
    pub build_time: Duration,
    pub p50: Duration,
    pub p95: Duration,
    pub precision: f64,
    pub recall: f64,
}

fn best_build(strategy: Strategy, h: &Hierarchy, pois: &[PoiRecord], repeats: usize) -> Result<(InvertedIndex, Duration), IndexError> {
    let mut best = Duration::MAX;
    let mut index = None;
    for _ in 0..repeats.max(1) {
        drop(index.take());
        let started = Instant::now();
        let built = build_index(strategy, h, pois)?;
        best = best.min(started.elapsed());
        index = Some(built);
    }
    Ok((index.expect("at least one build"), best))
}

fn timed_queries<F>(queries: &[MinuteOfDay], pois: &[PoiRecord], mut run: F) -> Result<(Vec<Duration>, MatchCounts), IndexError>
where
    F: FnMut(MinuteOfDay) -> Result<Vec<DocId>, IndexError>,
{
    for &t in queries.iter().take(10) {
        run(t)?;
    }
    let mut latencies = Vec::with_capacity(queries.len());
    let mut counts = MatchCounts::default();
    for &t in queries {
        let started = Instant::now();
        let docs = run(t)?;
        latencies.push(started.elapsed());
        counts += MatchCounts::from_sorted(&docs, &scope_filter_positions(pois, t, None));
    }
    Ok((latencies, counts))
}

/// Build time, query latency percentiles and accuracy per method. Queries run
/// one at a time on the calling thread.
pub fn end_to_end(
    pois: &[PoiRecord],
    methods: &[Method],
    queries: &[MinuteOfDay],
    h: &Hierarchy,
    build_repeats: usize,
) -> Result<Vec<EndToEndRow>, IndexError> {
    methods
        .iter()
        .map(|&method| {
            let (build_time, (latencies, counts)) = match method {
                Method::Index(strategy) => {
                    let (index, build) = best_build(strategy, h, pois, build_repeats)?;
                    (build, timed_queries(queries, pois, |t| Ok(index.point_query(t)?.docs))?)
                }
                Method::ScopeFilter => (
                    Duration::ZERO,
                    timed_queries(queries, pois, |t| Ok(scope_filter_positions(pois, t, None)))?,
                ),
            };
            Ok(EndToEndRow {
                method,
                hierarchy: h.clone(),
                docs: pois.len(),
                queries: queries.len(),
                build_time,
                p50: percentile(&latencies, 50.0),
                p95: percentile(&latencies, 95.0),
                precision: counts.precision(),
                recall: counts.recall(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRow {
    pub n: usize,
    pub seed: u64,
    pub hierarchy: Hierarchy,
    pub terms_per_doc: f64,
    pub total_terms: u64,
    pub unique_terms: usize,
    pub build_time: Duration,
    pub memory_bytes: u64,
    pub p50: Duration,
    pub p95: Duration,
}

/// Timehash index statistics at each document count, all drawn from `config`
/// with only `n` changed.
pub fn scalability(
    scales: &[usize],
    config: &DistributionConfig,
    h: &Hierarchy,
    queries: &[MinuteOfDay],
    build_repeats: usize,
) -> Result<Vec<ScaleRow>, ScaleError> {
    let mut rows = Vec::with_capacity(scales.len());
    for &n in scales {
        let pois = generate(&DistributionConfig { n, ..config.clone() })?;
        let (index, build_time) = best_build(Strategy::Timehash, h, &pois, build_repeats)?;
        for &t in queries.iter().take(10) {
            index.point_query(t)?;
        }
        let mut latencies = Vec::with_capacity(queries.len());
        for &t in queries {
            let started = Instant::now();
            let result = index.point_query(t)?;
            latencies.push(started.elapsed());
            drop(result);
        }
        rows.push(ScaleRow {
            n,
            seed: config.seed,
            hierarchy: h.clone(),
            terms_per_doc: index.term_total() as f64 / n.max(1) as f64,
            total_terms: index.term_total(),
            unique_terms: index.unique_terms(),
            build_time,
            memory_bytes: index.memory_estimate_bytes(),
            p50: percentile(&latencies, 50.0),
            p95: percentile(&latencies, 95.0),
        });
    }
    Ok(rows)
}

#[derive(Debug, thiserror::Error)]
pub enum ScaleError {
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub hierarchy: Hierarchy,
    pub total_terms: u64,
    /// Total terms relative to the 5-minute-only hierarchy, in percent.
    pub ratio_pct: f64,
}

/// Total terms per hierarchy relative to a single 5-minute level.
pub fn hierarchy_sweep(configs: &[Hierarchy], pois: &[PoiRecord]) -> Vec<SweepRow> {
    let total = |h: &Hierarchy| -> u64 {
        pois.par_iter()
            .map(|p| document_key_count(&p.ranges, h) as u64)
            .sum()
    };
    let baseline = total(&Hierarchy::new(&[5]).expect("valid")) as f64;
    configs
        .iter()
        .map(|h| {
            let t = total(h);
            SweepRow {
                hierarchy: h.clone(),
                total_terms: t,
                ratio_pct: if baseline > 0.0 { t as f64 / baseline * 100.0 } else { 0.0 },
            }
        })
        .collect()
}

impl Tabular for IndexSizeRow {
    const EXPERIMENT: &'static str = "indexsize";
    fn columns() -> &'static [&'static str] {
        &["terms_per_doc", "total_terms", "unique_terms", "reduction_pct", "precision", "recall", "memory_bytes"]
    }
    fn label(&self) -> String {
        self.strategy.to_string()
    }
    fn config(&self) -> String {
        let h = if self.strategy == Strategy::Timehash { format!(";hierarchy={}", self.hierarchy) } else { String::new() };
        format!("strategy={}{h};docs={};queries={}", self.strategy, self.docs, self.queries)
    }
    fn values(&self) -> Vec<f64> {
        vec![
            self.terms_per_doc,
            self.total_terms as f64,
            self.unique_terms as f64,
            self.reduction_pct,
            self.precision,
            self.recall,
            self.memory_bytes as f64,
        ]
    }
}

impl Tabular for EndToEndRow {
    const EXPERIMENT: &'static str = "e2e";
    fn columns() -> &'static [&'static str] {
        &["build_ms", "p50_us", "p95_us", "precision", "recall"]
    }
    fn label(&self) -> String {
        self.method.to_string()
    }
    fn config(&self) -> String {
        let h = if self.method == Method::Index(Strategy::Timehash) { format!(";hierarchy={}", self.hierarchy) } else { String::new() };
        format!("method={}{h};docs={};queries={}", self.method, self.docs, self.queries)
    }
    fn values(&self) -> Vec<f64> {
        vec![millis(self.build_time), micros(self.p50), micros(self.p95), self.precision, self.recall]
    }
}

impl Tabular for ScaleRow {
    const EXPERIMENT: &'static str = "scale";
    fn columns() -> &'static [&'static str] {
        &["n", "terms_per_doc", "total_terms", "unique_terms", "build_ms", "memory_bytes", "p50_us", "p95_us"]
    }
    fn label(&self) -> String {
        self.n.to_string()
    }
    fn config(&self) -> String {
        format!("n={};seed={};hierarchy={}", self.n, self.seed, self.hierarchy)
    }
    fn values(&self) -> Vec<f64> {
        vec![
            self.n as f64,
            self.terms_per_doc,
            self.total_terms as f64,
            self.unique_terms as f64,
            millis(self.build_time),
            self.memory_bytes as f64,
            micros(self.p50),
            micros(self.p95),
        ]
    }
}

impl Tabular for SweepRow {
    const EXPERIMENT: &'static str = "sweep";
    fn columns() -> &'static [&'static str] {
        &["levels", "total_terms", "ratio_pct"]
    }
    fn label(&self) -> String {
        self.hierarchy.to_string()
    }
    fn config(&self) -> String {
        format!("hierarchy={}", self.hierarchy)
    }
    fn values(&self) -> Vec<f64> {
        vec![self.hierarchy.depth() as f64, self.total_terms as f64, self.ratio_pct]
    }
}
