//! POI documents and their JSON-lines form.
//!
//! One object per line:
//! `{"id": "42", "ranges": [["1100","1400"],["1700","2100"]], "day": "mon"}`.
//! A start after its end wraps past midnight; `["0000","2400"]` is the whole day.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{parse_hhmm, split_wrapping, MinuteOfDay, TimeRange};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoiRecord {
    pub id: String,
    /// In-day ranges; midnight-spanning spans are already split.
    pub ranges: Vec<TimeRange>,
    pub day: Option<String>,
}

impl PoiRecord {
    pub fn new(id: impl Into<String>, ranges: Vec<TimeRange>) -> Self {
        PoiRecord {
            id: id.into(),
            ranges,
            day: None,
        }
    }

    pub fn with_day(mut self, day: impl Into<String>) -> Self {
        self.day = Some(day.into());
        self
    }

    /// Open at `t` under half-open semantics.
    #[inline]
    pub fn is_open_at(&self, t: MinuteOfDay) -> bool {
        self.ranges.iter().any(|r| r.contains(t))
    }

    pub fn overlaps(&self, q: &TimeRange) -> bool {
        self.ranges.iter().any(|r| r.overlaps(q))
    }

    /// Distinct open minutes across all ranges.
    pub fn open_minutes(&self) -> u32 {
        open_mask(&self.ranges).iter().map(|w| w.count_ones()).sum()
    }
}

/// 1440-bit mask of open minutes.
pub(crate) fn open_mask(ranges: &[TimeRange]) -> [u64; 23] {
    let mut mask = [0u64; 23];
    for r in ranges {
        for t in r.start().get()..r.end().get() {
            mask[(t / 64) as usize] |= 1 << (t % 64);
        }
    }
    mask
}

#[derive(Debug, Error)]
pub enum PoiParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoi {
    id: String,
    ranges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    day: Option<String>,
}

/// Parses one JSON object into a record, splitting wrapped spans.
pub fn parse_poi_line(text: &str) -> Result<PoiRecord, String> {
    let raw: RawPoi = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if raw.ranges.is_empty() {
        return Err(format!("document {:?} has no ranges", raw.id));
    }
    let mut ranges = Vec::with_capacity(raw.ranges.len());
    for [from, to] in &raw.ranges {
        let start = parse_hhmm(from).map_err(|e| e.to_string())?;
        let end = parse_hhmm(to).map_err(|e| e.to_string())?;
        if start == MinuteOfDay::END_OF_DAY {
            return Err(format!("range start {from:?} must be before 2400"));
        }
        ranges.extend(split_wrapping(start, end, false));
    }
    Ok(PoiRecord {
        id: raw.id,
        ranges,
        day: raw.day,
    })
}

pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<PoiRecord>, PoiParseError> {
    let mut pois = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let poi = parse_poi_line(&line).map_err(|message| PoiParseError::Malformed {
            line: i + 1,
            message,
        })?;
        pois.push(poi);
    }
    Ok(pois)
}

pub fn to_json_line(poi: &PoiRecord) -> String {
    let raw = RawPoi {
        id: poi.id.clone(),
        ranges: poi
            .ranges
            .iter()
            .map(|r| [r.start().to_string(), r.end().to_string()])
            .collect(),
        day: poi.day.clone(),
    };
    serde_json::to_string(&raw).expect("plain strings serialize")
}

pub fn write_jsonl(pois: &[PoiRecord], mut out: impl Write) -> std::io::Result<()> {
    for poi in pois {
        writeln!(out, "{}", to_json_line(poi))?;
    }
    Ok(())
}
