use std::collections::BTreeSet;

use proptest::prelude::*;
use timehash::index::{
    build_index, read_jsonl, scope_filter, scope_filter_positions, union_sorted, write_jsonl,
    DocId, IndexBuilder, MatchCounts, PoiRecord, Strategy as IndexStrategy, UnionMode,
};
use timehash::{Hierarchy, MinuteOfDay, TimeRange};

fn schedule() -> impl Strategy<Value = Vec<TimeRange>> {
    prop::collection::vec((0u32..1440, 1u32..=1440), 1..4).prop_map(|spans| {
        spans
            .into_iter()
            .map(|(s, len)| TimeRange::minutes(s, (s + len).min(1440)).unwrap())
            .collect()
    })
}

fn pois(max: usize) -> impl Strategy<Value = Vec<PoiRecord>> {
    prop::collection::vec((schedule(), prop::option::weighted(0.2, prop::sample::select(vec!["mon", "sat"]))), 0..max)
        .prop_map(|docs| {
            docs.into_iter()
                .enumerate()
                .map(|(i, (ranges, day))| {
                    let poi = PoiRecord::new(format!("{i:04}"), ranges);
                    match day {
                        Some(d) => poi.with_day(d),
                        None => poi,
                    }
                })
                .collect()
        })
}

fn minute(t: u32) -> MinuteOfDay {
    MinuteOfDay::new(t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exact_strategies_equal_the_scan(docs in pois(40), times in prop::collection::vec(0u32..1440, 1..20)) {
        let h = Hierarchy::default();
        for strategy in [IndexStrategy::Timehash, IndexStrategy::Minute1] {
            let index = build_index(strategy, &h, &docs).unwrap();
            for &t in &times {
                for day in [None, Some("mon"), Some("sat")] {
                    for mode in [UnionMode::Merge, UnionMode::Bitset, UnionMode::Auto] {
                        let got = index.point_query_with(minute(t), day, mode).unwrap().docs;
                        prop_assert_eq!(&got, &scope_filter_positions(&docs, minute(t), day));
                    }
                }
            }
        }
    }

    #[test]
    fn coarse_baselines_keep_full_recall(docs in pois(40), times in prop::collection::vec(0u32..1440, 1..20)) {
        let h = Hierarchy::default();
        for strategy in [IndexStrategy::Minute5, IndexStrategy::Hour1] {
            let index = build_index(strategy, &h, &docs).unwrap();
            for &t in &times {
                let got = index.point_query(minute(t)).unwrap().docs;
                let truth = scope_filter_positions(&docs, minute(t), None);
                let counts = MatchCounts::from_sorted(&got, &truth);
                prop_assert_eq!(counts.hits, counts.relevant);
            }
        }
    }

    #[test]
    fn range_queries_equal_the_overlap_scan(docs in pois(30), q in (0u32..1440, 1u32..600)) {
        let h = Hierarchy::default();
        let index = build_index(IndexStrategy::Timehash, &h, &docs).unwrap();
        let q = TimeRange::minutes(q.0, (q.0 + q.1).min(1440)).unwrap();
        let got = index.range_query(q, None).unwrap().docs;
        prop_assert_eq!(got, timehash::index::overlap_filter_positions(&docs, &q, None));
    }

    #[test]
    fn postings_sorted_and_totals_consistent(docs in pois(60)) {
        for strategy in IndexStrategy::ALL {
            let mut builder = IndexBuilder::new(strategy, Hierarchy::default());
            let mut sum = 0u64;
            for d in &docs {
                sum += builder.index_document(d).unwrap() as u64;
            }
            let index = builder.freeze();
            prop_assert_eq!(index.term_total(), sum);
            let mut postings = 0u64;
            for (_, list) in index.terms() {
                prop_assert!(list.windows(2).all(|w| w[0] < w[1]));
                postings += list.len() as u64;
            }
            prop_assert_eq!(postings, sum);
        }
    }

    #[test]
    fn union_modes_agree(lists in prop::collection::vec(prop::collection::btree_set(0u32..500, 0..100), 0..8)) {
        let owned: Vec<Vec<DocId>> = lists.iter().map(|l| l.iter().map(|&d| DocId(d)).collect()).collect();
        let refs: Vec<&[DocId]> = owned.iter().map(|l| l.as_slice()).collect();
        let expected: Vec<DocId> = lists.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().map(DocId).collect();
        for mode in [UnionMode::Merge, UnionMode::Bitset, UnionMode::Auto] {
            prop_assert_eq!(union_sorted(&refs, 500, mode), expected.clone());
        }
    }

    #[test]
    fn jsonl_round_trips(docs in pois(30)) {
        let mut buf = Vec::new();
        write_jsonl(&docs, &mut buf).unwrap();
        prop_assert_eq!(read_jsonl(buf.as_slice()).unwrap(), docs);
    }
}

#[test]
fn hour_baseline_loses_precision_on_half_hours() {
    let docs = vec![
        PoiRecord::new("closes-1130", vec![TimeRange::minutes(480, 690).unwrap()]),
        PoiRecord::new("opens-1140", vec![TimeRange::minutes(700, 1260).unwrap()]),
    ];
    let index = build_index(IndexStrategy::Hour1, &Hierarchy::default(), &docs).unwrap();
    let got = index.point_query(minute(700)).unwrap().docs;
    let truth = scope_filter_positions(&docs, minute(700), None);
    let counts = MatchCounts::from_sorted(&got, &truth);
    assert_eq!((counts.precision(), counts.recall()), (0.5, 1.0));
    assert_eq!(scope_filter(&docs, minute(700)), BTreeSet::from(["opens-1140"]));
}

#[test]
fn frozen_index_is_shareable() {
    let docs: Vec<PoiRecord> = (0..200)
        .map(|i| PoiRecord::new(i.to_string(), vec![TimeRange::minutes(i * 5, i * 5 + 300).unwrap()]))
        .collect();
    let index = build_index(IndexStrategy::Timehash, &Hierarchy::default(), &docs).unwrap();
    std::thread::scope(|s| {
        for t in [0u32, 400, 900, 1300] {
            let (index, docs) = (&index, &docs);
            s.spawn(move || {
                let got = index.point_query(minute(t)).unwrap().docs;
                assert_eq!(got, scope_filter_positions(docs, minute(t), None));
            });
        }
    });
}
