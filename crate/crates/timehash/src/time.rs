//! Minute-of-day points, half-open daily ranges and `hhmm` parsing.

use std::fmt;

use thiserror::Error;

use crate::hierarchy::DAY_MINUTES;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("expected 4 digits in hhmm format, got {0:?}")]
    BadFormat(String),
    #[error("time {0:?} is out of range")]
    OutOfRange(String),
    #[error("minute {0} is outside 0..=1440")]
    MinuteOutOfRange(u32),
    #[error("range start {start} is after end {end}")]
    InvertedRange { start: u32, end: u32 },
}

/// Minutes since midnight, `0..=1440`. The value 1440 (`2400`) is only
/// meaningful as an exclusive range end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MinuteOfDay(u16);

impl MinuteOfDay {
    pub const MIDNIGHT: MinuteOfDay = MinuteOfDay(0);
    pub const END_OF_DAY: MinuteOfDay = MinuteOfDay(DAY_MINUTES as u16);

    pub fn new(minutes: u32) -> Result<Self, TimeError> {
        if minutes > DAY_MINUTES {
            return Err(TimeError::MinuteOutOfRange(minutes));
        }
        Ok(MinuteOfDay(minutes as u16))
    }

    pub const fn from_hm(hour: u16, minute: u16) -> Self {
        MinuteOfDay(hour * 60 + minute)
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0 as u32
    }

    pub fn hour(self) -> u32 {
        self.get() / 60
    }

    pub fn minute(self) -> u32 {
        self.get() % 60
    }

    /// Point queries are only defined for `0..1440`.
    pub fn is_query_minute(self) -> bool {
        self.get() < DAY_MINUTES
    }
}

impl fmt::Display for MinuteOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}{:02}", self.hour(), self.minute())
    }
}

/// Parses a 4-digit `hhmm` string. `"2400"` is accepted and maps to 1440.
pub fn parse_hhmm(s: &str) -> Result<MinuteOfDay, TimeError> {
    let bytes = s.as_bytes();
    if bytes.len() != 4 || !bytes.iter().all(u8::is_ascii_digit) {
        return Err(TimeError::BadFormat(s.to_string()));
    }
    let digit = |i: usize| (bytes[i] - b'0') as u32;
    let hh = digit(0) * 10 + digit(1);
    let mm = digit(2) * 10 + digit(3);
    if hh > 24 || mm > 59 || (hh == 24 && mm > 0) {
        return Err(TimeError::OutOfRange(s.to_string()));
    }
    Ok(MinuteOfDay((hh * 60 + mm) as u16))
}

/// A half-open daily interval `[start, end)`; empty when `start == end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeRange {
    start: MinuteOfDay,
    end: MinuteOfDay,
}

impl TimeRange {
    pub const FULL_DAY: TimeRange = TimeRange {
        start: MinuteOfDay::MIDNIGHT,
        end: MinuteOfDay::END_OF_DAY,
    };

    pub fn new(start: MinuteOfDay, end: MinuteOfDay) -> Result<Self, TimeError> {
        if start > end {
            return Err(TimeError::InvertedRange {
                start: start.get(),
                end: end.get(),
            });
        }
        Ok(TimeRange { start, end })
    }

    /// Builds a range from raw minute values.
    pub fn minutes(start: u32, end: u32) -> Result<Self, TimeError> {
        TimeRange::new(MinuteOfDay::new(start)?, MinuteOfDay::new(end)?)
    }

    pub fn start(&self) -> MinuteOfDay {
        self.start
    }

    pub fn end(&self) -> MinuteOfDay {
        self.end
    }

    pub fn len(&self) -> u32 {
        self.end.get() - self.start.get()
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// `start <= t < end`.
    #[inline]
    pub fn contains(&self, t: MinuteOfDay) -> bool {
        self.start <= t && t < self.end
    }

    /// True when the two ranges share at least one minute.
    pub fn overlaps(&self, other: &TimeRange) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for TimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Normalizes an opening span to in-day ranges.
///
/// `start < end` is a plain range, `start > end` wraps past midnight and
/// splits into `[start, 1440)` and `[0, end)`. With `all_day` set the
/// endpoints are ignored and the whole day is returned.
pub fn split_wrapping(start: MinuteOfDay, end: MinuteOfDay, all_day: bool) -> Vec<TimeRange> {
    if all_day {
        return vec![TimeRange::FULL_DAY];
    }
    if start <= end {
        vec![TimeRange { start, end }]
    } else {
        vec![
            TimeRange {
                start,
                end: MinuteOfDay::END_OF_DAY,
            },
            TimeRange {
                start: MinuteOfDay::MIDNIGHT,
                end,
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u32) -> MinuteOfDay {
        MinuteOfDay::new(v).unwrap()
    }

    #[test]
    fn parse_hhmm_examples() {
        assert_eq!(parse_hhmm("1140").unwrap().get(), 700);
        assert_eq!(parse_hhmm("0000").unwrap().get(), 0);
        assert_eq!(parse_hhmm("2400").unwrap().get(), 1440);
        assert_eq!(
            parse_hhmm("2460"),
            Err(TimeError::OutOfRange("2460".into()))
        );
        assert!(matches!(parse_hhmm("2401"), Err(TimeError::OutOfRange(_))));
        assert!(matches!(parse_hhmm("2500"), Err(TimeError::OutOfRange(_))));
        assert!(matches!(parse_hhmm("114"), Err(TimeError::BadFormat(_))));
        assert!(matches!(parse_hhmm("11:4"), Err(TimeError::BadFormat(_))));
        assert!(matches!(parse_hhmm("١١٤٠"), Err(TimeError::BadFormat(_))));
    }

    #[test]
    fn display_roundtrips_hhmm() {
        for v in 0..=1440 {
            assert_eq!(parse_hhmm(&m(v).to_string()).unwrap().get(), v);
        }
    }

    #[test]
    fn ranges_are_half_open() {
        let r = TimeRange::minutes(700, 1260).unwrap();
        assert!(r.contains(m(700)));
        assert!(r.contains(m(1259)));
        assert!(!r.contains(m(1260)));
        assert!(!r.contains(m(699)));
        assert_eq!(r.len(), 560);
        assert!(TimeRange::minutes(5, 5).unwrap().is_empty());
        assert!(TimeRange::minutes(6, 5).is_err());
        assert!(MinuteOfDay::new(1441).is_err());
    }

    #[test]
    fn overlap_is_half_open() {
        let a = TimeRange::minutes(720, 780).unwrap();
        assert!(a.overlaps(&TimeRange::minutes(750, 840).unwrap()));
        assert!(!a.overlaps(&TimeRange::minutes(780, 840).unwrap()));
        assert!(!a.overlaps(&TimeRange::minutes(600, 720).unwrap()));
    }

    #[test]
    fn split_wrapping_examples() {
        assert_eq!(
            split_wrapping(m(1320), m(120), false),
            vec![
                TimeRange::minutes(1320, 1440).unwrap(),
                TimeRange::minutes(0, 120).unwrap()
            ]
        );
        assert_eq!(
            split_wrapping(m(480), m(1080), false),
            vec![TimeRange::minutes(480, 1080).unwrap()]
        );
        assert_eq!(split_wrapping(m(600), m(600), true), vec![TimeRange::FULL_DAY]);
        assert_eq!(
            split_wrapping(m(0), m(1440), false),
            vec![TimeRange::FULL_DAY]
        );
    }
}
