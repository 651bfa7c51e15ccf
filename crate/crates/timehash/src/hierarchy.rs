//! Measure hierarchies: the ordered block sizes that parameterize key generation.
//!
//! A hierarchy lists block lengths in minutes, coarsest first. Every level must
//! divide the level above it and the coarsest level must tile the day from
//! 00:00, so every block boundary at a coarse level is also a boundary at all
//! finer levels.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Minutes in one day.
pub const DAY_MINUTES: u32 = 1440;

/// Maximum number of levels.
pub const MAX_LEVELS: usize = 6;

/// The reference hierarchy: 4h, 1h, 15m, 5m, 1m.
pub const DEFAULT_MEASURES: [u32; 5] = [240, 60, 15, 5, 1];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("hierarchy must contain at least one measure")]
    Empty,
    #[error("measure {0} is outside 1..=1440 minutes")]
    InvalidMeasure(u32),
    #[error("measures must be strictly descending: {coarser} is followed by {finer}")]
    NotDescending { coarser: u32, finer: u32 },
    #[error("measure {finer} does not divide {coarser}")]
    NotDivisible { coarser: u32, finer: u32 },
    #[error("coarsest measure {0} does not divide the 1440-minute day")]
    CoarsestNotDayDivisor(u32),
    #[error("{0} levels given, at most 6 are supported")]
    TooManyLevels(usize),
    #[error("invalid measure {0:?} in hierarchy list")]
    Parse(String),
}

/// A block length in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Measure(u32);

impl Measure {
    pub fn new(minutes: u32) -> Result<Self, HierarchyError> {
        if minutes == 0 || minutes > DAY_MINUTES {
            return Err(HierarchyError::InvalidMeasure(minutes));
        }
        Ok(Measure(minutes))
    }

    #[inline]
    pub fn minutes(self) -> u32 {
        self.0
    }

    /// Whether this level's key component is an hour (measures of an hour or
    /// more) rather than a minute-of-hour.
    #[inline]
    pub fn is_hour_level(self) -> bool {
        self.0 >= 60
    }
}

/// How one level contributes to a composite key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    /// Two digits: the block-start hour (measures of 60 minutes or more).
    Hour,
    /// Two digits: the block-start minute-of-hour. Used when the parent
    /// level's blocks each lie within a single hour, so the prefix pins the hour.
    MinuteOfHour,
    /// Four digits `hhmm`: a sub-hour level whose prefix does not pin the hour
    /// (first level, or parent blocks spanning more than one hour).
    HourMinute,
}

impl Component {
    pub fn width(self) -> usize {
        match self {
            Component::Hour | Component::MinuteOfHour => 2,
            Component::HourMinute => 4,
        }
    }
}

/// A validated, immutable measure hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hierarchy {
    measures: Vec<Measure>,
    components: Vec<Component>,
}

impl Hierarchy {
    /// Validates a coarsest-first list of measures.
    pub fn new(measures: &[u32]) -> Result<Self, HierarchyError> {
        if measures.is_empty() {
            return Err(HierarchyError::Empty);
        }
        if measures.len() > MAX_LEVELS {
            return Err(HierarchyError::TooManyLevels(measures.len()));
        }
        let validated = measures
            .iter()
            .map(|&m| Measure::new(m))
            .collect::<Result<Vec<_>, _>>()?;
        for pair in measures.windows(2) {
            let (coarser, finer) = (pair[0], pair[1]);
            if finer >= coarser {
                return Err(HierarchyError::NotDescending { coarser, finer });
            }
            if coarser % finer != 0 {
                return Err(HierarchyError::NotDivisible { coarser, finer });
            }
        }
        if DAY_MINUTES % measures[0] != 0 {
            return Err(HierarchyError::CoarsestNotDayDivisor(measures[0]));
        }
        let components = (0..validated.len())
            .map(|i| {
                if validated[i].is_hour_level() {
                    Component::Hour
                } else if i > 0 && 60 % validated[i - 1].0 == 0 {
                    Component::MinuteOfHour
                } else {
                    Component::HourMinute
                }
            })
            .collect();
        Ok(Hierarchy {
            measures: validated,
            components,
        })
    }

    pub fn measures(&self) -> &[Measure] {
        &self.measures
    }

    pub fn minutes(&self) -> impl Iterator<Item = u32> + '_ {
        self.measures.iter().map(|m| m.0)
    }

    /// Number of levels (`k`).
    pub fn depth(&self) -> usize {
        self.measures.len()
    }

    /// Measure at a 1-based depth.
    pub fn measure_at(&self, depth: usize) -> Option<Measure> {
        depth.checked_sub(1).and_then(|i| self.measures.get(i)).copied()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Length of a key at a 1-based depth.
    pub fn key_width(&self, depth: usize) -> usize {
        self.components[..depth].iter().map(|c| c.width()).sum()
    }

    pub fn coarsest(&self) -> Measure {
        self.measures[0]
    }

    pub fn finest(&self) -> Measure {
        self.measures[self.measures.len() - 1]
    }

    /// True when the finest level is one minute, i.e. every range is covered exactly.
    pub fn is_minute_exact(&self) -> bool {
        self.finest().0 == 1
    }

    /// Keys contributed by refining the two outer range boundaries, independent
    /// of range length: `2 * sum((m[i-1] / m[i]) - 1)` over levels 2..k.
    pub fn boundary_constant(&self) -> u32 {
        boundary_constant_of(&self.minutes().collect::<Vec<_>>())
    }

    /// Upper bound on keys for any single range of at most `day_length` minutes.
    ///
    /// Panics if `day_length` exceeds one day.
    pub fn max_key_bound(&self, day_length: u32) -> u32 {
        assert!(day_length <= DAY_MINUTES, "day_length {day_length} exceeds 1440");
        day_length / self.coarsest().0 + 1 + self.boundary_constant()
    }
}

pub(crate) fn boundary_constant_of(measures: &[u32]) -> u32 {
    2 * measures
        .windows(2)
        .map(|pair| pair[0] / pair[1] - 1)
        .sum::<u32>()
}

impl Default for Hierarchy {
    fn default() -> Self {
        Hierarchy::new(&DEFAULT_MEASURES).expect("reference hierarchy is valid")
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.measures.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", m.0)?;
        }
        Ok(())
    }
}

/// Parses the comma-separated descending minute list used on the command line,
/// e.g. `"240,60,15,5,1"`.
impl FromStr for Hierarchy {
    type Err = HierarchyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let measures = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                part.parse::<u32>()
                    .map_err(|_| HierarchyError::Parse(part.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Hierarchy::new(&measures)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_reference_hierarchy() {
        let h = Hierarchy::default();
        assert_eq!(h.minutes().collect::<Vec<_>>(), vec![240, 60, 15, 5, 1]);
        assert_eq!(h.depth(), 5);
        assert!(h.is_minute_exact());
    }

    #[test]
    fn rejects_ordering_violation() {
        assert_eq!(
            Hierarchy::new(&[60, 240]),
            Err(HierarchyError::NotDescending {
                coarser: 60,
                finer: 240
            })
        );
        assert_eq!(
            Hierarchy::new(&[60, 60]),
            Err(HierarchyError::NotDescending {
                coarser: 60,
                finer: 60
            })
        );
    }

    #[test]
    fn rejects_divisibility_violation() {
        assert_eq!(
            Hierarchy::new(&[240, 100]),
            Err(HierarchyError::NotDivisible {
                coarser: 240,
                finer: 100
            })
        );
    }

    #[test]
    fn rejects_bad_coarsest_and_sizes() {
        assert_eq!(
            Hierarchy::new(&[100, 50]),
            Err(HierarchyError::CoarsestNotDayDivisor(100))
        );
        assert_eq!(
            Hierarchy::new(&[1440, 720, 240, 60, 30, 15, 5]),
            Err(HierarchyError::TooManyLevels(7))
        );
        assert_eq!(Hierarchy::new(&[]), Err(HierarchyError::Empty));
        assert_eq!(Hierarchy::new(&[0]), Err(HierarchyError::InvalidMeasure(0)));
        assert_eq!(
            Hierarchy::new(&[2880]),
            Err(HierarchyError::InvalidMeasure(2880))
        );
    }

    #[test]
    fn boundary_constant_examples() {
        assert_eq!(Hierarchy::default().boundary_constant(), 24);
        assert_eq!(Hierarchy::new(&[240]).unwrap().boundary_constant(), 0);
        // 2 * (60/1 - 1)
        assert_eq!(Hierarchy::new(&[60, 1]).unwrap().boundary_constant(), 118);
    }

    #[test]
    fn degenerate_finest_repeat_adds_nothing() {
        for measures in [&[240u32, 60, 15, 5, 1][..], &[60, 1], &[120, 60, 30, 5]] {
            let mut extended = measures.to_vec();
            extended.push(*measures.last().unwrap());
            assert_eq!(boundary_constant_of(measures), boundary_constant_of(&extended));
        }
    }

    #[test]
    fn max_key_bound_examples() {
        assert_eq!(Hierarchy::default().max_key_bound(1440), 31);
        assert_eq!(Hierarchy::new(&[1440]).unwrap().max_key_bound(1440), 2);
        assert_eq!(Hierarchy::new(&[60, 1]).unwrap().max_key_bound(1440), 143);
    }

    #[test]
    fn component_kinds() {
        use Component::*;
        assert_eq!(
            Hierarchy::default().components(),
            &[Hour, Hour, MinuteOfHour, MinuteOfHour, MinuteOfHour]
        );
        assert_eq!(Hierarchy::new(&[5]).unwrap().components(), &[HourMinute]);
        assert_eq!(
            Hierarchy::new(&[240, 15, 5, 1]).unwrap().components(),
            &[Hour, HourMinute, MinuteOfHour, MinuteOfHour]
        );
        assert_eq!(Hierarchy::default().key_width(5), 10);
        assert_eq!(Hierarchy::new(&[240, 15, 5, 1]).unwrap().key_width(2), 6);
    }

    #[test]
    fn parses_and_displays_csv() {
        let h: Hierarchy = "240, 60,15,5,1".parse().unwrap();
        assert_eq!(h, Hierarchy::default());
        assert_eq!(h.to_string(), "240,60,15,5,1");
        assert!(matches!(
            "240,x".parse::<Hierarchy>(),
            Err(HierarchyError::Parse(_))
        ));
    }
}
