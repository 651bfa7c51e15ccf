//! Oracle equivalence checks: key intersection against the half-open
//! containment and overlap predicates.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::hierarchy::{Hierarchy, DAY_MINUTES};
use crate::keygen::{index_terms, point_query_terms, range_query_terms, TimehashKey};
use crate::time::{MinuteOfDay, TimeRange};

/// Random probe minutes per range on top of the boundary probes.
const RANDOM_PROBES: usize = 32;
const MAX_EXAMPLES: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub ranges: u64,
    pub checks: u64,
    pub mismatches: u64,
    /// The first few mismatches, human readable.
    pub examples: Vec<String>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches == 0
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.mismatches += 1;
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(describe());
            }
        }
    }

    fn merge(mut self, other: VerifyReport) -> Self {
        self.ranges += other.ranges;
        self.checks += other.checks;
        self.mismatches += other.mismatches;
        for e in other.examples {
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(e);
            }
        }
        self
    }
}

/// Query keys for every minute of the day.
fn point_table(h: &Hierarchy, day: u32) -> Vec<Vec<TimehashKey>> {
    (0..day)
        .map(|t| point_query_terms(MinuteOfDay::new(t).expect("in day"), h).expect("query minute"))
        .collect()
}

fn check_range(
    report: &mut VerifyReport,
    h: &Hierarchy,
    table: &[Vec<TimehashKey>],
    range: TimeRange,
    probes: impl Iterator<Item = u32>,
) {
    let keys: Vec<TimehashKey> = index_terms(range, h).into_iter().collect();
    let (s, e) = (range.start().get(), range.end().get());
    report.ranges += 1;
    for t in probes {
        let matched = table[t as usize].iter().any(|k| keys.binary_search(k).is_ok());
        let truth = s <= t && t < e;
        report.record(matched == truth, || {
            format!("range [{s},{e}) at minute {t}: keys say {matched}, oracle says {truth}")
        });
    }
}

fn probes(s: u32, e: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut out: Vec<u32> = [Some(s), s.checked_sub(1), Some(e - 1), Some(e)]
        .into_iter()
        .flatten()
        .filter(|&t| t < DAY_MINUTES)
        .collect();
    out.extend((0..RANDOM_PROBES).map(|_| rng.gen_range(0..DAY_MINUTES)));
    out
}

/// Every non-empty range of the day, probed at its boundaries and at 32
/// random minutes.
pub fn verify_exhaustive(h: &Hierarchy, seed: u64) -> VerifyReport {
    let table = point_table(h, DAY_MINUTES);
    (0..DAY_MINUTES)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut report = VerifyReport::default();
            for e in s + 1..=DAY_MINUTES {
                let range = TimeRange::minutes(s, e).expect("in day");
                check_range(&mut report, h, &table, range, probes(s, e, &mut rng).into_iter());
            }
            report
        })
        .reduce(VerifyReport::default, VerifyReport::merge)
}

/// `samples` random non-empty ranges with the same probes.
pub fn verify_sampled(h: &Hierarchy, samples: usize, seed: u64) -> VerifyReport {
    let table = point_table(h, DAY_MINUTES);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerifyReport::default();
    for _ in 0..samples {
        let a = rng.gen_range(0..=DAY_MINUTES);
        let b = rng.gen_range(0..=DAY_MINUTES);
        let (s, e) = match a.cmp(&b) {
            std::cmp::Ordering::Less => (a, b),
            std::cmp::Ordering::Greater => (b, a),
            std::cmp::Ordering::Equal if a < DAY_MINUTES => (a, a + 1),
            std::cmp::Ordering::Equal => (a - 1, a),
        };
        let range = TimeRange::minutes(s, e).expect("in day");
        check_range(&mut report, h, &table, range, probes(s, e, &mut rng).into_iter());
    }
    report
}

/// Dense ids for every key whose block lies in `[0, day)`, found by parsing
/// the key text back into its block.
struct KeyIds {
    ids: HashMap<TimehashKey, usize>,
}

impl KeyIds {
    fn new(h: &Hierarchy, day: u32) -> Self {
        let mut ids = HashMap::new();
        for t in 0..day {
            for key in point_query_terms(MinuteOfDay::new(t).expect("in day"), h).expect("query minute") {
                let next = ids.len();
                ids.entry(key).or_insert(next);
            }
        }
        KeyIds { ids }
    }

    fn words(&self) -> usize {
        self.ids.len().div_ceil(64)
    }

    fn bitset<'a>(&self, keys: impl IntoIterator<Item = &'a TimehashKey>) -> Vec<u64> {
        let mut bits = vec![0u64; self.words()];
        for k in keys {
            let id = self.ids[k];
            bits[id / 64] |= 1 << (id % 64);
        }
        bits
    }
}

fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Exhaustive check on a shortened day of `day` minutes: every range against
/// every query minute, and every range against every query range.
pub fn verify_reduced_day(h: &Hierarchy, day: u32) -> VerifyReport {
    assert!(day <= DAY_MINUTES && day % h.coarsest().minutes() == 0);
    let ids = KeyIds::new(h, day);
    let table = point_table(h, day);
    let ranges: Vec<(u32, u32)> = (0..day)
        .flat_map(|s| (s + 1..=day).map(move |e| (s, e)))
        .collect();
    let range = |&(s, e): &(u32, u32)| TimeRange::minutes(s, e).expect("in day");
    let doc_bits: Vec<Vec<u64>> = ranges.par_iter().map(|r| ids.bitset(&index_terms(range(r), h))).collect();
    let query_bits: Vec<Vec<u64>> = ranges
        .par_iter()
        .map(|r| ids.bitset(&range_query_terms(range(r), h)))
        .collect();
    let point_bits: Vec<Vec<u64>> = table.iter().map(|keys| ids.bitset(keys)).collect();
    ranges
        .par_iter()
        .zip(doc_bits.par_iter())
        .map(|(&(s, e), doc)| {
            let mut report = VerifyReport { ranges: 1, ..Default::default() };
            for (t, q) in point_bits.iter().enumerate() {
                let t = t as u32;
                let (matched, truth) = (intersects(doc, q), s <= t && t < e);
                report.record(matched == truth, || {
                    format!("range [{s},{e}) at minute {t}: keys say {matched}, oracle says {truth}")
                });
            }
            for (&(a, b), q) in ranges.iter().zip(&query_bits) {
                let (matched, truth) = (intersects(doc, q), s < b && a < e);
                report.record(matched == truth, || {
                    format!("range [{s},{e}) vs query [{a},{b}): keys say {matched}, oracle says {truth}")
                });
            }
            report
        })
        .reduce(VerifyReport::default, VerifyReport::merge)
}
