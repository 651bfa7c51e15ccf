//! Deterministic synthetic POI schedules.
//!
//! Every POI consumes the same number of random draws whatever its shape, so
//! two configs that differ only in `duration_scale` produce the same start
//! times and branch choices. That keeps open time monotone in the scale, which
//! [`calibrate`] relies on.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hierarchy::Hierarchy;
use crate::index::PoiRecord;
use crate::keygen::document_key_count;
use crate::time::TimeRange;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("target {target} minute1 terms/doc is outside the reachable range [{low:.1}, {high:.1}]")]
    Unreachable { target: f64, low: f64, high: f64 },
    #[error("config file: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Parameters of the synthetic schedule distribution.
///
/// Minute classes are `[:00, :30, other 5-minute multiples, non-aligned]`;
/// the same categorical is used for opening and closing minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributionConfig {
    pub seed: u64,
    pub n: usize,
    pub start_minute_weights: [f64; 4],
    /// Minutes drawn (uniformly) for the "other 5-minute multiple" class.
    pub other_minute_values: Vec<u32>,
    pub start_hour_weights: [f64; 24],
    pub duration_hours: Vec<u32>,
    pub duration_hour_weights: Vec<f64>,
    /// Multiplies the drawn duration before the closing minute is snapped.
    pub duration_scale: f64,
    pub break_fraction: f64,
    pub break_gap_minutes: Vec<u32>,
    pub break_gap_weights: Vec<f64>,
    pub all_day_fraction: f64,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        DistributionConfig {
            seed: 42,
            n: 100_000,
            start_minute_weights: [0.837, 0.155, 0.008, 0.0],
            other_minute_values: vec![15, 45],
            #[rustfmt::skip]
            start_hour_weights: [
                0.003, 0.001, 0.001, 0.001, 0.003, 0.040,
                0.130, 0.030, 0.030, 0.333, 0.180, 0.100,
                0.015, 0.030, 0.020, 0.015, 0.015, 0.015,
                0.010, 0.006, 0.004, 0.004, 0.004, 0.010,
            ],
            duration_hours: vec![3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14],
            duration_hour_weights: vec![
                0.02, 0.07, 0.05, 0.07, 0.09, 0.10, 0.08, 0.27, 0.09, 0.07, 0.05, 0.04,
            ],
            duration_scale: 0.8535,
            break_fraction: 0.091,
            break_gap_minutes: vec![60, 120, 180],
            break_gap_weights: vec![0.3, 0.4, 0.3],
            all_day_fraction: 0.158,
        }
    }
}

fn check_weights(name: &str, weights: &[f64]) -> Result<(), DatagenError> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(DatagenError::InvalidConfig(format!("{name} has a negative weight")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(DatagenError::InvalidConfig(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

fn check_probability(name: &str, p: f64) -> Result<(), DatagenError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(DatagenError::InvalidConfig(format!("{name} = {p} is not a probability")))
    }
}

impl DistributionConfig {
    pub fn from_toml(text: &str) -> Result<Self, DatagenError> {
        let config: DistributionConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        check_weights("start_minute_weights", &self.start_minute_weights)?;
        check_weights("start_hour_weights", &self.start_hour_weights)?;
        check_weights("duration_hour_weights", &self.duration_hour_weights)?;
        check_weights("break_gap_weights", &self.break_gap_weights)?;
        check_probability("break_fraction", self.break_fraction)?;
        check_probability("all_day_fraction", self.all_day_fraction)?;
        check_probability("all_day_fraction + break_fraction", self.all_day_fraction + self.break_fraction)?;
        let invalid = |msg: &str| Err(DatagenError::InvalidConfig(msg.to_string()));
        if self.duration_hours.len() != self.duration_hour_weights.len() {
            return invalid("duration_hours and duration_hour_weights differ in length");
        }
        if self.break_gap_minutes.len() != self.break_gap_weights.len() {
            return invalid("break_gap_minutes and break_gap_weights differ in length");
        }
        if self.duration_hours.iter().any(|&h| h == 0 || h > 24) {
            return invalid("duration_hours must lie in 1..=24");
        }
        if self.break_gap_minutes.iter().any(|&g| g == 0 || g >= 720) {
            return invalid("break gaps must lie in 1..720");
        }
        if self.start_minute_weights[2] > 0.0
            && (self.other_minute_values.is_empty()
                || self
                    .other_minute_values
                    .iter()
                    .any(|&m| m >= 60 || m % 5 != 0 || m == 0 || m == 30))
        {
            return invalid("other_minute_values must be 5-minute multiples other than :00/:30");
        }
        if !(self.duration_scale.is_finite() && self.duration_scale > 0.0) {
            return invalid("duration_scale must be positive");
        }
        Ok(())
    }
}

struct Sampler {
    minute_class: WeightedIndex<f64>,
    hour: WeightedIndex<f64>,
    duration: WeightedIndex<f64>,
    gap: WeightedIndex<f64>,
}

impl Sampler {
    fn new(c: &DistributionConfig) -> Self {
        let weighted = |w: &[f64]| WeightedIndex::new(w).expect("weights validated");
        Sampler {
            minute_class: weighted(&c.start_minute_weights),
            hour: weighted(&c.start_hour_weights),
            duration: weighted(&c.duration_hour_weights),
            gap: weighted(&c.break_gap_weights),
        }
    }
}

/// Fixed-size bundle of draws for one POI.
struct Draws {
    /// Picks all-day, break or plain schedules.
    kind: f64,
    /// Spreads durations within the drawn hour.
    jitter: f64,
    hour: usize,
    start_class: usize,
    start_pick: f64,
    duration: usize,
    end_class: usize,
    end_pick: f64,
    split: f64,
    gap: usize,
}

impl Draws {
    fn sample(rng: &mut ChaCha8Rng, s: &Sampler) -> Self {
        Draws {
            kind: rng.gen(),
            jitter: rng.gen(),
            hour: s.hour.sample(rng),
            start_class: s.minute_class.sample(rng),
            start_pick: rng.gen(),
            duration: s.duration.sample(rng),
            end_class: s.minute_class.sample(rng),
            end_pick: rng.gen(),
            split: rng.gen(),
            gap: s.gap.sample(rng),
        }
    }
}

const NON_ALIGNED: [u32; 48] = {
    let mut out = [0u32; 48];
    let (mut m, mut i) = (0, 0);
    while m < 60 {
        if m % 5 != 0 {
            out[i] = m;
            i += 1;
        }
        m += 1;
    }
    out
};

fn pick<T: Copy>(values: &[T], u: f64) -> T {
    values[((u * values.len() as f64) as usize).min(values.len() - 1)]
}

fn minute_of_class(c: &DistributionConfig, class: usize, u: f64) -> u32 {
    match class {
        0 => 0,
        1 => 30,
        2 => pick(&c.other_minute_values, u),
        _ => pick(&NON_ALIGNED, u),
    }
}

fn full_day() -> Vec<TimeRange> {
    vec![TimeRange::FULL_DAY]
}

/// Ranges for a span `[start, start + len)` that may run past midnight.
fn wrapped(start: u32, len: u32) -> Vec<TimeRange> {
    let end = start + len;
    if end <= 1440 {
        vec![TimeRange::minutes(start, end).expect("in day")]
    } else {
        vec![
            TimeRange::minutes(0, end - 1440).expect("in day"),
            TimeRange::minutes(start, 1440).expect("in day"),
        ]
    }
}

fn schedule(c: &DistributionConfig, d: &Draws) -> Vec<TimeRange> {
    if d.kind < c.all_day_fraction {
        return full_day();
    }
    let start = d.hour as u32 * 60 + minute_of_class(c, d.start_class, d.start_pick);
    let target = (c.duration_hours[d.duration] as f64 + d.jitter) * 60.0 * c.duration_scale;
    let close_hour = ((start as f64 + target) / 60.0).floor() as u32;
    let mut close = close_hour * 60 + minute_of_class(c, d.end_class, d.end_pick);
    if close <= start {
        close += 60;
    }
    let open = close - start;
    if d.kind < c.all_day_fraction + c.break_fraction {
        let gap = c.break_gap_minutes[d.gap];
        let open = open.min(1440 - gap).max(2);
        // the break starts on a half hour relative to the opening
        let first = ((open as f64 * (0.3 + 0.4 * d.split)) as u32 / 30 * 30).clamp(1, open - 1);
        let start = start.min(1440 - (open + gap));
        let second = start + first + gap;
        return vec![
            TimeRange::minutes(start, start + first).expect("in day"),
            TimeRange::minutes(second, start + open + gap).expect("in day"),
        ];
    }
    if open >= 1440 {
        full_day()
    } else {
        wrapped(start, open)
    }
}

/// `n` POIs with ids `"00000000"`, `"00000001"`, ...
pub fn generate(config: &DistributionConfig) -> Result<Vec<PoiRecord>, DatagenError> {
    config.validate()?;
    let sampler = Sampler::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    Ok((0..config.n)
        .map(|i| {
            let draws = Draws::sample(&mut rng, &sampler);
            PoiRecord::new(format!("{i:08}"), schedule(config, &draws))
        })
        .collect())
}

fn is_all_day(p: &PoiRecord) -> bool {
    p.ranges.len() == 1 && p.ranges[0] == TimeRange::FULL_DAY
}

fn wraps(p: &PoiRecord) -> bool {
    p.ranges.iter().any(|r| r.start().get() == 0)
        && p.ranges.iter().any(|r| r.end().get() == 1440)
        && !is_all_day(p)
}

/// Opening minute of a schedule; for a midnight-spanning schedule the
/// evening start, not the `0000` continuation.
pub fn opening_minute(p: &PoiRecord) -> Option<u32> {
    if is_all_day(p) || p.ranges.is_empty() {
        return None;
    }
    if wraps(p) {
        return p
            .ranges
            .iter()
            .find(|r| r.end().get() == 1440)
            .map(|r| r.start().get());
    }
    p.ranges.iter().map(|r| r.start().get()).min()
}

/// Whether the schedule has a closed interval inside its day.
pub fn has_break(p: &PoiRecord) -> bool {
    p.ranges.len() - usize::from(wraps(p)) >= 2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub n: usize,
    /// Opening-minute classes over non-24-hour POIs.
    pub start_on_hour: f64,
    pub start_on_half_hour: f64,
    pub start_other_five: f64,
    pub start_non_aligned: f64,
    pub all_day_fraction: f64,
    pub break_fraction: f64,
    pub mean_duration: f64,
    pub mean_duration_excluding_all_day: f64,
    pub minute1_terms_per_doc: f64,
    pub timehash_terms_per_doc: f64,
}

pub fn distribution_report(pois: &[PoiRecord], h: &Hierarchy) -> DistributionReport {
    let n = pois.len();
    let mut classes = [0usize; 4];
    let (mut all_day, mut breaks) = (0usize, 0usize);
    let (mut open_total, mut open_partial, mut timehash_total) = (0u64, 0u64, 0u64);
    for p in pois {
        let open = p.open_minutes() as u64;
        open_total += open;
        timehash_total += document_key_count(&p.ranges, h) as u64;
        if has_break(p) {
            breaks += 1;
        }
        match opening_minute(p) {
            None => all_day += 1,
            Some(start) => {
                open_partial += open;
                let class = match start % 60 {
                    0 => 0,
                    30 => 1,
                    m if m % 5 == 0 => 2,
                    _ => 3,
                };
                classes[class] += 1;
            }
        }
    }
    let ratio = |a: u64, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let partial = n - all_day;
    DistributionReport {
        n,
        start_on_hour: ratio(classes[0] as u64, partial),
        start_on_half_hour: ratio(classes[1] as u64, partial),
        start_other_five: ratio(classes[2] as u64, partial),
        start_non_aligned: ratio(classes[3] as u64, partial),
        all_day_fraction: ratio(all_day as u64, n),
        break_fraction: ratio(breaks as u64, n),
        mean_duration: ratio(open_total, n),
        mean_duration_excluding_all_day: ratio(open_partial, partial),
        minute1_terms_per_doc: ratio(open_total, n),
        timehash_terms_per_doc: ratio(timehash_total, n),
    }
}

fn mean_open_minutes(config: &DistributionConfig) -> Result<f64, DatagenError> {
    let pois = generate(config)?;
    if pois.is_empty() {
        return Err(DatagenError::InvalidConfig("calibration needs n > 0".into()));
    }
    let total: u64 = pois.iter().map(|p| p.open_minutes() as u64).sum();
    Ok(total as f64 / pois.len() as f64)
}

const SCALE_BOUNDS: (f64, f64) = (0.05, 8.0);

/// Searches `duration_scale` until the mean minute1 terms/doc of a sample of
/// `base.n` POIs lies within 1% of `target`. Returns `base` untouched if it
/// already does.
pub fn calibrate(target: f64, base: &DistributionConfig) -> Result<DistributionConfig, DatagenError> {
    if !(target.is_finite() && target > 0.0) {
        return Err(DatagenError::InvalidConfig(format!("target {target} must be positive")));
    }
    let within = |mean: f64| (mean - target).abs() <= 0.01 * target;
    if within(mean_open_minutes(base)?) {
        return Ok(base.clone());
    }
    let with_scale = |scale| DistributionConfig {
        duration_scale: scale,
        ..base.clone()
    };
    let (mut lo, mut hi) = SCALE_BOUNDS;
    let (low, high) = (
        mean_open_minutes(&with_scale(lo))?,
        mean_open_minutes(&with_scale(hi))?,
    );
    if target < low * 0.99 || target > high * 1.01 {
        return Err(DatagenError::Unreachable { target, low, high });
    }
    let mut best = (f64::INFINITY, base.duration_scale);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let mean = mean_open_minutes(&with_scale(mid))?;
        if (mean - target).abs() < best.0 {
            best = ((mean - target).abs(), mid);
        }
        if within(mean) && (mean - target).abs() <= 0.001 * target {
            break;
        }
        if mean < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 <= 0.01 * target {
        Ok(with_scale(best.1))
    } else {
        Err(DatagenError::Unreachable { target, low, high })
    }
}
