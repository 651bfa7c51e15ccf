//! In-memory inverted index over time terms, the baseline term schemes and
//! the linear-scan oracle.
//!
//! Documents are added to an [`IndexBuilder`]; [`IndexBuilder::freeze`] turns
//! it into an immutable [`InvertedIndex`] that can be shared across threads.
//! Documents get dense [`DocId`]s in insertion order, so every posting list is
//! sorted and duplicate-free by construction.

mod poi;
mod term;
mod union;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::hierarchy::Hierarchy;
use crate::keygen::{cover, encode_block, point_query_terms, range_query_terms, KeygenError};
use crate::time::{MinuteOfDay, TimeRange};

pub use poi::{parse_poi_line, read_jsonl, to_json_line, write_jsonl, PoiParseError, PoiRecord};
pub(crate) use poi::open_mask;
pub use term::{Term, MAX_PREFIX_LEN, MAX_TERM_LEN};
pub use union::{union_sorted, UnionMode};

/// Term scheme used by an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Timehash,
    /// One term per open minute (`hhmm`).
    Minute1,
    /// One term per 5-minute block intersecting an open range.
    Minute5,
    /// One term per hour block intersecting an open range.
    Hour1,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Minute1,
        Strategy::Minute5,
        Strategy::Hour1,
        Strategy::Timehash,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Timehash => "timehash",
            Strategy::Minute1 => "minute1",
            Strategy::Minute5 => "minute5",
            Strategy::Hour1 => "hour1",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| IndexError::UnknownStrategy(s.to_string()))
    }
}

/// Dense document number assigned in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("document {0:?} is already indexed")]
    DuplicateDocument(String),
    #[error("terms built for hierarchy {terms} cannot enter an index built for {index}")]
    MixedHierarchy { index: String, terms: String },
    #[error("terms built for strategy {terms} cannot enter a {index} index")]
    StrategyMismatch { index: Strategy, terms: Strategy },
    #[error("range queries are only supported by timehash indexes, not {0}")]
    UnsupportedStrategy(Strategy),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("day prefix {0:?} is longer than 16 bytes")]
    PrefixTooLong(String),
    #[error(transparent)]
    Keygen(#[from] KeygenError),
}

/// The term set of one document, tagged with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSet {
    strategy: Strategy,
    hierarchy: Option<Hierarchy>,
    terms: Vec<Term>,
}

impl TermSet {
    /// `hierarchy` is only consulted for [`Strategy::Timehash`].
    pub fn build(strategy: Strategy, hierarchy: &Hierarchy, poi: &PoiRecord) -> Result<Self, IndexError> {
        let mut terms = Vec::new();
        document_terms_into(strategy, hierarchy, poi, &mut terms)?;
        Ok(TermSet {
            strategy,
            hierarchy: (strategy == Strategy::Timehash).then(|| hierarchy.clone()),
            terms,
        })
    }

    /// Sorted, duplicate-free terms.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn hhmm(t: u32) -> [u8; 4] {
    let (h, m) = (t / 60, t % 60);
    [
        b'0' + (h / 10) as u8,
        b'0' + (h % 10) as u8,
        b'0' + (m / 10) as u8,
        b'0' + (m % 10) as u8,
    ]
}

fn prefix_bytes(day: Option<&str>) -> Result<&[u8], IndexError> {
    let prefix = day.unwrap_or("");
    if prefix.len() > MAX_PREFIX_LEN {
        return Err(IndexError::PrefixTooLong(prefix.to_string()));
    }
    Ok(prefix.as_bytes())
}

fn term(prefix: &[u8], body: &[u8]) -> Term {
    Term::with_prefix(prefix, body).expect("prefix length checked")
}

fn any_in(mask: &[u64; 23], from: u32, to: u32) -> bool {
    (from..to).any(|t| mask[(t / 64) as usize] & (1 << (t % 64)) != 0)
}

/// Appends the sorted, duplicate-free terms of `poi` to `out` (which is cleared).
fn document_terms_into(
    strategy: Strategy,
    hierarchy: &Hierarchy,
    poi: &PoiRecord,
    out: &mut Vec<Term>,
) -> Result<(), IndexError> {
    out.clear();
    let prefix = prefix_bytes(poi.day.as_deref())?;
    match strategy {
        Strategy::Timehash => {
            for range in &poi.ranges {
                for block in cover(*range, hierarchy) {
                    out.push(term(prefix, encode_block(block, hierarchy).as_bytes()));
                }
            }
        }
        Strategy::Minute1 => {
            let mask = open_mask(&poi.ranges);
            for (w, &word) in mask.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let t = w as u32 * 64 + bits.trailing_zeros();
                    out.push(term(prefix, &hhmm(t)));
                    bits &= bits - 1;
                }
            }
        }
        Strategy::Minute5 => {
            let mask = open_mask(&poi.ranges);
            for block in (0..1440).step_by(5) {
                if any_in(&mask, block, block + 5) {
                    out.push(term(prefix, &hhmm(block)));
                }
            }
        }
        Strategy::Hour1 => {
            let mask = open_mask(&poi.ranges);
            for hour in 0..24 {
                if any_in(&mask, hour * 60, hour * 60 + 60) {
                    out.push(term(prefix, &hhmm(hour * 60)[..2]));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(())
}

/// Mutable build phase of an index.
pub struct IndexBuilder {
    strategy: Strategy,
    hierarchy: Hierarchy,
    ids: Vec<String>,
    id_lookup: HashMap<String, DocId>,
    postings: HashMap<Term, Vec<DocId>>,
    term_total: u64,
    scratch: Vec<Term>,
}

impl IndexBuilder {
    /// `hierarchy` only affects [`Strategy::Timehash`] indexes.
    pub fn new(strategy: Strategy, hierarchy: Hierarchy) -> Self {
        IndexBuilder {
            strategy,
            hierarchy,
            ids: Vec::new(),
            id_lookup: HashMap::new(),
            postings: HashMap::new(),
            term_total: 0,
            scratch: Vec::new(),
        }
    }

    pub fn timehash(hierarchy: Hierarchy) -> Self {
        IndexBuilder::new(Strategy::Timehash, hierarchy)
    }

    pub fn with_capacity(mut self, docs: usize) -> Self {
        self.ids.reserve(docs);
        self.id_lookup.reserve(docs);
        self
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn doc_count(&self) -> usize {
        self.ids.len()
    }

    pub fn term_total(&self) -> u64 {
        self.term_total
    }

    fn register(&mut self, id: &str) -> Result<DocId, IndexError> {
        if self.id_lookup.contains_key(id) {
            return Err(IndexError::DuplicateDocument(id.to_string()));
        }
        let doc = DocId(self.ids.len() as u32);
        self.ids.push(id.to_string());
        self.id_lookup.insert(id.to_string(), doc);
        Ok(doc)
    }

    fn add_postings(&mut self, doc: DocId, terms: &[Term]) {
        for t in terms {
            self.postings.entry(*t).or_default().push(doc);
        }
        self.term_total += terms.len() as u64;
    }

    /// Generates the document's terms for this index's strategy and posts them.
    /// Returns the size of the document's term set.
    pub fn index_document(&mut self, poi: &PoiRecord) -> Result<usize, IndexError> {
        let mut scratch = std::mem::take(&mut self.scratch);
        let result = document_terms_into(self.strategy, &self.hierarchy, poi, &mut scratch)
            .and_then(|()| self.register(&poi.id))
            .map(|doc| {
                self.add_postings(doc, &scratch);
                scratch.len()
            });
        self.scratch = scratch;
        result
    }

    /// Posts a precomputed term set; rejects sets built for another configuration.
    pub fn insert_terms(&mut self, id: &str, terms: &TermSet) -> Result<usize, IndexError> {
        if terms.strategy != self.strategy {
            return Err(IndexError::StrategyMismatch {
                index: self.strategy,
                terms: terms.strategy,
            });
        }
        if let Some(h) = &terms.hierarchy {
            if *h != self.hierarchy {
                return Err(IndexError::MixedHierarchy {
                    index: self.hierarchy.to_string(),
                    terms: h.to_string(),
                });
            }
        }
        let doc = self.register(id)?;
        self.add_postings(doc, &terms.terms);
        Ok(terms.len())
    }

    pub fn freeze(self) -> InvertedIndex {
        InvertedIndex {
            strategy: self.strategy,
            hierarchy: self.hierarchy,
            ids: self.ids,
            postings: self
                .postings
                .into_iter()
                .map(|(t, list)| (t, list.into_boxed_slice()))
                .collect(),
            term_total: self.term_total,
        }
    }
}

/// Builds and freezes an index over `pois`.
pub fn build_index(
    strategy: Strategy,
    hierarchy: &Hierarchy,
    pois: &[PoiRecord],
) -> Result<InvertedIndex, IndexError> {
    let mut builder = IndexBuilder::new(strategy, hierarchy.clone()).with_capacity(pois.len());
    for poi in pois {
        builder.index_document(poi)?;
    }
    Ok(builder.freeze())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    /// Sorted, duplicate-free.
    pub docs: Vec<DocId>,
    pub terms_probed: usize,
    /// Term generation, posting lookups and union.
    pub latency: Duration,
}

/// Immutable, shareable index.
pub struct InvertedIndex {
    strategy: Strategy,
    hierarchy: Hierarchy,
    ids: Vec<String>,
    postings: HashMap<Term, Box<[DocId]>>,
    term_total: u64,
}

impl InvertedIndex {
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn doc_count(&self) -> usize {
        self.ids.len()
    }

    /// Sum of per-document term-set sizes (= number of postings).
    pub fn term_total(&self) -> u64 {
        self.term_total
    }

    pub fn unique_terms(&self) -> usize {
        self.postings.len()
    }

    pub fn doc_id(&self, doc: DocId) -> &str {
        &self.ids[doc.0 as usize]
    }

    pub fn resolve(&self, docs: &[DocId]) -> Vec<&str> {
        docs.iter().map(|&d| self.doc_id(d)).collect()
    }

    pub fn posting(&self, term: &str) -> &[DocId] {
        Term::new(term)
            .and_then(|t| self.postings.get(&t))
            .map_or(&[], |list| list)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &[DocId])> {
        self.postings.iter().map(|(t, l)| (t, &**l))
    }

    /// Rough in-memory size: 4 bytes per posting, a fixed cost per distinct
    /// term and the document id table.
    pub fn memory_estimate_bytes(&self) -> u64 {
        const PER_TERM: u64 = (MAX_TERM_LEN + 1 + 16 + 8) as u64;
        let ids: u64 = self.ids.iter().map(|id| id.len() as u64 + 24).sum();
        self.term_total * 4 + self.postings.len() as u64 * PER_TERM + ids
    }

    fn point_terms(&self, t: MinuteOfDay, prefix: &[u8]) -> Result<Vec<Term>, IndexError> {
        if !t.is_query_minute() {
            return Err(KeygenError::NotAQueryMinute(t.get()).into());
        }
        let minute = t.get();
        Ok(match self.strategy {
            Strategy::Timehash => point_query_terms(t, &self.hierarchy)?
                .iter()
                .map(|k| term(prefix, k.as_bytes()))
                .collect(),
            Strategy::Minute1 => vec![term(prefix, &hhmm(minute))],
            Strategy::Minute5 => vec![term(prefix, &hhmm(minute / 5 * 5))],
            Strategy::Hour1 => vec![term(prefix, &hhmm(minute / 60 * 60)[..2])],
        })
    }

    fn probe(&self, terms: &[Term], mode: UnionMode) -> Vec<DocId> {
        let lists: Vec<&[DocId]> = terms
            .iter()
            .filter_map(|t| self.postings.get(t).map(|l| &**l))
            .collect();
        union_sorted(&lists, self.ids.len(), mode)
    }

    /// Documents open at minute `t` (`0..1440`) with no day tag.
    pub fn point_query(&self, t: MinuteOfDay) -> Result<QueryResult, IndexError> {
        self.point_query_with(t, None, UnionMode::Auto)
    }

    /// Documents tagged `day` (or untagged, for `None`) open at `t`.
    pub fn point_query_with(
        &self,
        t: MinuteOfDay,
        day: Option<&str>,
        mode: UnionMode,
    ) -> Result<QueryResult, IndexError> {
        let started = Instant::now();
        let terms = self.point_terms(t, prefix_bytes(day)?)?;
        let docs = self.probe(&terms, mode);
        Ok(QueryResult {
            docs,
            terms_probed: terms.len(),
            latency: started.elapsed(),
        })
    }

    /// Documents whose open time overlaps `q`. Timehash indexes only.
    pub fn range_query(&self, q: TimeRange, day: Option<&str>) -> Result<QueryResult, IndexError> {
        if self.strategy != Strategy::Timehash {
            return Err(IndexError::UnsupportedStrategy(self.strategy));
        }
        let started = Instant::now();
        let prefix = prefix_bytes(day)?;
        let terms: Vec<Term> = range_query_terms(q, &self.hierarchy)
            .iter()
            .map(|k| term(prefix, k.as_bytes()))
            .collect();
        let docs = self.probe(&terms, UnionMode::Auto);
        Ok(QueryResult {
            docs,
            terms_probed: terms.len(),
            latency: started.elapsed(),
        })
    }
}

/// Linear-scan oracle: ids of documents open at `t`.
pub fn scope_filter(pois: &[PoiRecord], t: MinuteOfDay) -> BTreeSet<&str> {
    pois.iter()
        .filter(|p| p.is_open_at(t))
        .map(|p| p.id.as_str())
        .collect()
}

/// Linear-scan oracle returning slice positions, which coincide with the
/// [`DocId`]s of an index built from the same slice. `day` must equal the
/// document's day tag.
pub fn scope_filter_positions(pois: &[PoiRecord], t: MinuteOfDay, day: Option<&str>) -> Vec<DocId> {
    pois.iter()
        .enumerate()
        .filter(|(_, p)| p.day.as_deref() == day && p.is_open_at(t))
        .map(|(i, _)| DocId(i as u32))
        .collect()
}

/// Linear-scan overlap oracle for range queries.
pub fn overlap_filter_positions(pois: &[PoiRecord], q: &TimeRange, day: Option<&str>) -> Vec<DocId> {
    pois.iter()
        .enumerate()
        .filter(|(_, p)| p.day.as_deref() == day && p.overlaps(q))
        .map(|(i, _)| DocId(i as u32))
        .collect()
}

/// Hit counts for precision/recall, poolable across queries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub returned: u64,
    pub relevant: u64,
    pub hits: u64,
}

impl MatchCounts {
    /// Both inputs sorted and duplicate-free.
    pub fn from_sorted<T: Ord>(result: &[T], truth: &[T]) -> Self {
        let (mut i, mut j, mut hits) = (0, 0, 0);
        while i < result.len() && j < truth.len() {
            match result[i].cmp(&truth[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    hits += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        MatchCounts {
            returned: result.len() as u64,
            relevant: truth.len() as u64,
            hits,
        }
    }

    /// 1.0 when nothing was returned and nothing was relevant, 0.0 when nothing
    /// was returned but something was relevant.
    pub fn precision(&self) -> f64 {
        match (self.returned, self.relevant) {
            (0, 0) => 1.0,
            (0, _) => 0.0,
            (r, _) => self.hits as f64 / r as f64,
        }
    }

    /// 1.0 when nothing was relevant and nothing returned, 0.0 when nothing was
    /// relevant but something was returned.
    pub fn recall(&self) -> f64 {
        match (self.relevant, self.returned) {
            (0, 0) => 1.0,
            (0, _) => 0.0,
            (c, _) => self.hits as f64 / c as f64,
        }
    }
}

impl std::ops::AddAssign for MatchCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.returned += rhs.returned;
        self.relevant += rhs.relevant;
        self.hits += rhs.hits;
    }
}

/// `(precision, recall)` of a result set against the ground truth.
pub fn precision_recall<T: Ord>(result: &BTreeSet<T>, truth: &BTreeSet<T>) -> (f64, f64) {
    let hits = result.intersection(truth).count() as u64;
    let counts = MatchCounts {
        returned: result.len() as u64,
        relevant: truth.len() as u64,
        hits,
    };
    (counts.precision(), counts.recall())
}
