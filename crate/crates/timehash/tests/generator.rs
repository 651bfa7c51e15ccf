use timehash::datagen::{
    calibrate, distribution_report, generate, has_break, DatagenError, DistributionConfig,
};
use timehash::index::write_jsonl;
use timehash::Hierarchy;

#[test]
fn default_sample_statistics() {
    let pois = generate(&DistributionConfig::default()).unwrap();
    assert_eq!(pois.len(), 100_000);
    let r = distribution_report(&pois, &Hierarchy::default());
    assert!((r.start_on_hour - 0.837).abs() <= 0.005, "{r:?}");
    assert!((r.start_on_hour + r.start_on_half_hour - 0.992).abs() <= 0.005, "{r:?}");
    assert!((r.break_fraction - 0.091).abs() <= 0.005, "{r:?}");
    assert!((r.timehash_terms_per_doc - 5.6).abs() <= 0.2, "{r:?}");
    assert!((r.minute1_terms_per_doc - 609.7).abs() <= 6.097, "{r:?}");
    assert_eq!(r.start_non_aligned, 0.0);
}

#[test]
fn calibration_hits_the_table_target() {
    let base = DistributionConfig { duration_scale: 1.2, ..DistributionConfig::default() };
    let tuned = calibrate(609.7, &base).unwrap();
    assert_ne!(tuned.duration_scale, 1.2);
    let r = distribution_report(&generate(&tuned).unwrap(), &Hierarchy::default());
    assert!((r.minute1_terms_per_doc - 609.7).abs() <= 6.0, "{r:?}");
    assert_eq!(calibrate(609.7, &tuned).unwrap(), tuned);
}

#[test]
fn full_day_target_is_reached_or_reported() {
    let base = DistributionConfig { n: 20_000, ..DistributionConfig::default() };
    match calibrate(1440.0, &base) {
        Err(DatagenError::Unreachable { high, .. }) => assert!(high < 1440.0 * 0.99),
        Ok(config) => {
            let r = distribution_report(&generate(&config).unwrap(), &Hierarchy::default());
            assert!(r.minute1_terms_per_doc >= 1440.0 * 0.99);
        }
        Err(e) => panic!("unexpected {e}"),
    }
}

#[test]
fn jsonl_bytes_are_reproducible() {
    let config = DistributionConfig { n: 5_000, seed: 9, ..DistributionConfig::default() };
    let render = || {
        let mut buf = Vec::new();
        write_jsonl(&generate(&config).unwrap(), &mut buf).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn break_schedules_have_positive_gaps() {
    let pois = generate(&DistributionConfig { n: 20_000, ..DistributionConfig::default() }).unwrap();
    let breaks: Vec<_> = pois.iter().filter(|p| has_break(p)).collect();
    assert!(!breaks.is_empty());
    for p in breaks {
        assert_eq!(p.ranges.len(), 2);
        assert!(p.ranges[0].end() < p.ranges[1].start(), "{p:?}");
    }
}

#[test]
fn config_files_are_validated() {
    let ok = DistributionConfig::from_toml("n = 10\nseed = 3\nall_day_fraction = 0.0\n").unwrap();
    assert_eq!(generate(&ok).unwrap().len(), 10);
    assert!(DistributionConfig::from_toml("start_minute_weights = [0.5, 0.5, 0.5, 0.0]").is_err());
    assert!(DistributionConfig::from_toml("n = \"many\"").is_err());
}
