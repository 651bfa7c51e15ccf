//! Key generation: encoding aligned blocks as composite keys and decomposing
//! ranges (index side) and points/ranges (query side) into key sets.
//!
//! A key is read left to right, one component per level, each component
//! naming the block containing the key's block start at that level. For the
//! reference hierarchy `08113040` is the 4h block `08`, refined to the hour
//! `11`, the quarter hour `30` and finally the 5-minute block `40`, i.e. the
//! block 11:40–11:45.
//!
//! Index and query keys are produced by the same [`encode`], so a point query
//! matches a document exactly when one of the document's blocks contains the
//! query minute.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::hierarchy::{Component, Hierarchy, DAY_MINUTES};
use crate::time::{MinuteOfDay, TimeRange};

/// Longest possible key: six 4-digit components.
pub const MAX_KEY_LEN: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeygenError {
    #[error("block start {start} is not aligned to the {measure}-minute grid")]
    Misaligned { start: u32, measure: u32 },
    #[error("depth {depth} is outside 1..={levels}")]
    BadDepth { depth: usize, levels: usize },
    #[error("minute {0} is not a valid query minute (0..1440)")]
    NotAQueryMinute(u32),
    #[error("{0:?} is not a key of this hierarchy")]
    BadKey(String),
}

/// One aligned block at a hierarchy level (0-based `level`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    pub start: u32,
    pub level: usize,
}

impl Block {
    pub fn range(&self, h: &Hierarchy) -> TimeRange {
        let m = h.measures()[self.level].minutes();
        TimeRange::minutes(self.start, self.start + m).expect("blocks lie within the day")
    }
}

/// A composite numeric key. Ordering, equality and hashing follow the key text.
#[derive(Clone, Copy)]
pub struct TimehashKey {
    buf: [u8; MAX_KEY_LEN],
    len: u8,
    depth: u8,
}

impl TimehashKey {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(self.as_bytes()).expect("keys are ASCII digits")
    }

    #[inline]
    pub fn as_bytes(&self) -> &[u8] {
        &self.buf[..self.len as usize]
    }

    /// 1-based level index.
    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Parses key text, checking it against `h` and returning the block it names.
    pub fn parse(text: &str, h: &Hierarchy) -> Result<(TimehashKey, Block), KeygenError> {
        let bad = || KeygenError::BadKey(text.to_string());
        let bytes = text.as_bytes();
        if bytes.is_empty() || !bytes.iter().all(u8::is_ascii_digit) {
            return Err(bad());
        }
        let depth = (1..=h.depth())
            .find(|&d| h.key_width(d) == bytes.len())
            .ok_or_else(bad)?;

        let mut pos = 0;
        let mut parent = TimeRange::FULL_DAY;
        let mut start = 0;
        for (level, component) in h.components()[..depth].iter().enumerate() {
            let m = h.measures()[level].minutes();
            let digits = &bytes[pos..pos + component.width()];
            pos += component.width();
            let value = digits
                .iter()
                .fold(0u32, |acc, d| acc * 10 + (d - b'0') as u32);
            start = match component {
                Component::Hour => {
                    // the unique block start of this level inside hour `value`
                    let first = (value * 60).div_ceil(m) * m;
                    if value >= 24 || first >= value * 60 + 60 {
                        return Err(bad());
                    }
                    first
                }
                Component::MinuteOfHour => {
                    if value >= 60 {
                        return Err(bad());
                    }
                    parent.start().hour() * 60 + value
                }
                Component::HourMinute => {
                    let (hh, mm) = (value / 100, value % 100);
                    if hh >= 24 || mm >= 60 {
                        return Err(bad());
                    }
                    hh * 60 + mm
                }
            };
            if start % m != 0 || start < parent.start().get() || start + m > parent.end().get()
            {
                return Err(bad());
            }
            parent = TimeRange::minutes(start, start + m).map_err(|_| bad())?;
        }
        let block = Block {
            start,
            level: depth - 1,
        };
        Ok((encode_block(block, h), block))
    }
}

impl PartialEq for TimehashKey {
    fn eq(&self, other: &Self) -> bool {
        self.as_bytes() == other.as_bytes()
    }
}

impl Eq for TimehashKey {}

impl Hash for TimehashKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.as_bytes().hash(state)
    }
}

impl PartialOrd for TimehashKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimehashKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_bytes().cmp(other.as_bytes())
    }
}

impl fmt::Display for TimehashKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for TimehashKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimehashKey({:?})", self.as_str())
    }
}

fn push_2(buf: &mut [u8; MAX_KEY_LEN], len: &mut usize, v: u32) {
    buf[*len] = b'0' + (v / 10) as u8;
    buf[*len + 1] = b'0' + (v % 10) as u8;
    *len += 2;
}

/// Encodes an aligned block. The caller guarantees alignment.
#[inline]
pub(crate) fn encode_block(block: Block, h: &Hierarchy) -> TimehashKey {
    let mut buf = [0u8; MAX_KEY_LEN];
    let mut len = 0;
    let measures = h.measures();
    for (level, component) in h.components()[..=block.level].iter().enumerate() {
        let m = measures[level].minutes();
        let level_start = block.start / m * m;
        match component {
            Component::Hour => push_2(&mut buf, &mut len, level_start / 60),
            Component::MinuteOfHour => push_2(&mut buf, &mut len, level_start % 60),
            Component::HourMinute => {
                push_2(&mut buf, &mut len, level_start / 60);
                push_2(&mut buf, &mut len, level_start % 60);
            }
        }
    }
    TimehashKey {
        buf,
        len: len as u8,
        depth: (block.level + 1) as u8,
    }
}

/// Encodes the block starting at `block_start` at a 1-based `depth`.
pub fn encode(
    block_start: MinuteOfDay,
    depth: usize,
    h: &Hierarchy,
) -> Result<TimehashKey, KeygenError> {
    let measure = h.measure_at(depth).ok_or(KeygenError::BadDepth {
        depth,
        levels: h.depth(),
    })?;
    let start = block_start.get();
    if start % measure.minutes() != 0 || start >= DAY_MINUTES {
        return Err(KeygenError::Misaligned {
            start,
            measure: measure.minutes(),
        });
    }
    Ok(encode_block(
        Block {
            start,
            level: depth - 1,
        },
        h,
    ))
}

/// Greedy cover of a range by aligned blocks, in time order.
///
/// At each position the largest measure whose grid the position lies on and
/// whose block ends at or before the range end is taken. With a 1-minute
/// finest level the blocks tile the range exactly. With a coarser finest level
/// a non-aligned boundary is covered by the finest block containing it, so the
/// cover may extend past the range.
pub fn cover<'h>(range: TimeRange, h: &'h Hierarchy) -> Cover<'h> {
    Cover {
        h,
        current: range.start().get(),
        end: range.end().get(),
    }
}

pub struct Cover<'h> {
    h: &'h Hierarchy,
    current: u32,
    end: u32,
}

impl Iterator for Cover<'_> {
    type Item = Block;

    #[inline]
    fn next(&mut self) -> Option<Block> {
        if self.current >= self.end {
            return None;
        }
        let measures = self.h.measures();
        for (level, m) in measures.iter().enumerate() {
            let m = m.minutes();
            if self.current % m == 0 && self.current + m <= self.end {
                let block = Block {
                    start: self.current,
                    level,
                };
                self.current += m;
                return Some(block);
            }
        }
        let level = measures.len() - 1;
        let m = measures[level].minutes();
        let start = self.current / m * m;
        self.current = start + m;
        Some(Block { start, level })
    }
}

/// Number of keys [`index_terms`] would produce, without building them.
pub fn index_key_count(range: TimeRange, h: &Hierarchy) -> usize {
    cover(range, h).count()
}

/// Size of a document's key set: distinct blocks over all its ranges.
pub fn document_key_count(ranges: &[TimeRange], h: &Hierarchy) -> usize {
    match ranges {
        [] => 0,
        [one] => index_key_count(*one, h),
        _ => {
            let mut blocks: Vec<Block> = ranges.iter().flat_map(|r| cover(*r, h)).collect();
            blocks.sort_unstable();
            blocks.dedup();
            blocks.len()
        }
    }
}

/// Index-side keys for one range. Empty ranges produce no keys.
pub fn index_terms(range: TimeRange, h: &Hierarchy) -> BTreeSet<TimehashKey> {
    cover(range, h).map(|b| encode_block(b, h)).collect()
}

/// Point-query keys: the block containing `t` at every level, coarsest first.
pub fn point_query_terms(t: MinuteOfDay, h: &Hierarchy) -> Result<Vec<TimehashKey>, KeygenError> {
    if !t.is_query_minute() {
        return Err(KeygenError::NotAQueryMinute(t.get()));
    }
    let t = t.get();
    Ok(h.measures()
        .iter()
        .enumerate()
        .map(|(level, m)| {
            let m = m.minutes();
            encode_block(
                Block {
                    start: t / m * m,
                    level,
                },
                h,
            )
        })
        .collect())
}

/// Range-query keys: at every level, every block sharing a minute with `q`.
pub fn range_query_terms(q: TimeRange, h: &Hierarchy) -> BTreeSet<TimehashKey> {
    let mut keys = BTreeSet::new();
    if q.is_empty() {
        return keys;
    }
    let (start, end) = (q.start().get(), q.end().get());
    for (level, m) in h.measures().iter().enumerate() {
        let m = m.minutes();
        let mut block = start / m * m;
        while block < end {
            keys.insert(encode_block(Block { start: block, level }, h));
            block += m;
        }
    }
    keys
}

/// All keys for a document: the union over its ranges, each optionally
/// prefixed verbatim (e.g. a day tag `mon` gives `mon1212`).
pub fn document_terms(
    ranges: &[TimeRange],
    h: &Hierarchy,
    prefix: Option<&str>,
) -> BTreeSet<String> {
    let prefix = prefix.unwrap_or("");
    ranges
        .iter()
        .flat_map(|r| cover(*r, h))
        .map(|b| format!("{prefix}{}", encode_block(b, h)))
        .collect()
}
