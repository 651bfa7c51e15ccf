//! Acceptance suite. Runs each criterion in turn, prints one PASS/FAIL line
//! per criterion and exits non-zero if any failed. Criteria run serially so
//! timing measurements do not disturb each other.

use std::process::Command;
use std::panic;
use std::time::{Duration, Instant};

use timehash::bench::{
    ablation, enumerate_key_stats, end_to_end, hierarchy_sweep, index_size_comparison,
    sample_queries, scalability, verify_exhaustive, verify_reduced_day, Method,
};
use timehash::datagen::{calibrate, generate, DistributionConfig};
use timehash::index::Strategy;
use timehash::{index_terms, parse_hhmm, Hierarchy, TimeRange};

/// Collects named checks and reports them on one line.
struct Criterion {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Criterion { id, name, failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn close(self) -> bool {
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let detail = if self.failures.is_empty() {
            self.notes.join("; ")
        } else {
            format!("failed: {}", self.failures.join("; "))
        };
        println!("criterion {} ({}): {verdict} | {detail}", self.id, self.name);
        self.failures.is_empty()
    }
}

fn range(from: &str, to: &str) -> TimeRange {
    TimeRange::new(parse_hhmm(from).unwrap(), parse_hhmm(to).unwrap()).unwrap()
}

fn hierarchy(m: &[u32]) -> Hierarchy {
    Hierarchy::new(m).unwrap()
}

fn near(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol + 1e-9
}

fn calibrated_pois(n: usize) -> Vec<timehash::index::PoiRecord> {
    let config = calibrate(609.7, &DistributionConfig { n, ..DistributionConfig::default() }).unwrap();
    generate(&config).unwrap()
}

fn criterion_1_worked_key_sets() -> bool {
    let mut c = Criterion::new(1, "worked key sets");
    let h = Hierarchy::default();
    let cases: [(&str, &str, &[&str]); 4] = [
        ("1140", "2100", &["08113040", "081145", "12", "16", "2020"]),
        ("0800", "2100", &["08", "12", "16", "2020"]),
        ("1200", "1600", &["12"]),
        ("1200", "1300", &["1212"]),
    ];
    for (from, to, expected) in cases {
        let got: Vec<String> = index_terms(range(from, to), &h).iter().map(|k| k.to_string()).collect();
        c.check(got == expected, format!("{from}-{to} -> {got:?}"));
    }
    c.close()
}

fn criterion_2_oracle_equivalence() -> bool {
    let mut c = Criterion::new(2, "oracle equivalence");
    let started = Instant::now();
    let full = verify_exhaustive(&Hierarchy::default(), 42);
    let reduced = verify_reduced_day(&hierarchy(&[60, 15, 5, 1]), 240);
    let elapsed = started.elapsed();
    c.check(
        full.is_clean() && full.ranges == 1_037_520,
        format!("{} ranges, {} checks, {} mismatches {:?}", full.ranges, full.checks, full.mismatches, full.examples),
    );
    c.check(
        reduced.is_clean() && reduced.ranges == 240 * 241 / 2,
        format!(
            "reduced day: {} ranges, {} checks, {} mismatches {:?}",
            reduced.ranges, reduced.checks, reduced.mismatches, reduced.examples
        ),
    );
    c.check(elapsed < Duration::from_secs(120), format!("{elapsed:.1?}"));
    c.close()
}

fn criterion_3_key_count_bounds() -> bool {
    let mut c = Criterion::new(3, "key-count bounds");
    let h = Hierarchy::default();
    c.check(h.boundary_constant() == 24, format!("B = {}", h.boundary_constant()));
    c.check(h.max_key_bound(1440) == 31, format!("bound = {}", h.max_key_bound(1440)));
    let started = Instant::now();
    let stats = enumerate_key_stats(&h);
    let elapsed = started.elapsed();
    c.check(stats.overall.max == 28, format!("overall max {}", stats.overall.max));
    let table: [(&str, f64, u32, u32); 4] =
        [("<1h", 6.5, 1, 14), ("1-4h", 9.2, 1, 20), ("4-12h", 13.1, 2, 25), ("12-24h", 15.4, 4, 28)];
    for ((label, avg, min, max), got) in table.iter().zip(stats.buckets.iter()) {
        c.check(near(got.avg(), *avg, 0.2), format!("{label} avg {:.3} (expected {avg} +-0.2)", got.avg()));
        c.check(
            (got.min, got.max) == (*min, *max),
            format!("{label} min-max {}-{} (expected {min}-{max})", got.min, got.max),
        );
    }
    c.check(elapsed < Duration::from_secs(60), format!("{elapsed:.1?}"));
    c.close()
}

fn criterion_4_ablation() -> bool {
    let mut c = Criterion::new(4, "ablation");
    let rows = ablation(
        &Hierarchy::default(),
        &[hierarchy(&[60, 15, 5, 1]), hierarchy(&[240, 60, 1]), hierarchy(&[240, 60, 30, 15, 5, 1])],
    );
    let (full, no4h, three, six) = (&rows[0], &rows[1], &rows[2], &rows[3]);
    c.check(near(full.avg_keys, 5.8, 0.1), format!("full avg {:.3} (expected 5.8 +-0.1)", full.avg_keys));
    c.check(near(no4h.avg_keys, 8.8, 0.1), format!("remove 4h avg {:.3} (expected 8.8 +-0.1)", no4h.avg_keys));
    c.check(near(no4h.delta_pct, 51.0, 3.0), format!("remove 4h delta {:+.1}% (expected +51 +-3)", no4h.delta_pct));
    c.check(near(three.avg_keys, 18.3, 0.2), format!("3-level avg {:.3} (expected 18.3 +-0.2)", three.avg_keys));
    c.check(near(three.delta_pct, 214.0, 5.0), format!("3-level delta {:+.1}% (expected +214 +-5)", three.delta_pct));
    c.check(near(six.delta_pct, -5.0, 2.0), format!("6-level delta {:+.1}% (expected -5 +-2)", six.delta_pct));
    c.close()
}

fn criterion_5_index_size_comparison() -> bool {
    let mut c = Criterion::new(5, "index size and accuracy");
    let pois = calibrated_pois(100_000);
    let h = Hierarchy::default();
    let rows = index_size_comparison(&pois, &Strategy::ALL, &sample_queries(200, 7), &h).unwrap();
    let by = |s| rows.iter().find(|r| r.strategy == s).unwrap();
    let (th, m1, h1) = (by(Strategy::Timehash), by(Strategy::Minute1), by(Strategy::Hour1));
    c.check(near(th.terms_per_doc, 5.6, 0.2), format!("timehash {:.3} terms/doc", th.terms_per_doc));
    c.check(
        (m1.terms_per_doc - 609.7).abs() <= 0.02 * 609.7,
        format!("minute1 {:.1} terms/doc", m1.terms_per_doc),
    );
    c.check(th.reduction_pct >= 98.8, format!("reduction {:.2}%", th.reduction_pct));
    c.check(
        th.precision == 1.0 && th.recall == 1.0 && th.queries >= 100,
        format!("timehash P/R {}/{} over {} queries", th.precision, th.recall, th.queries),
    );
    c.check(h1.precision < 1.0, format!("hour1 precision {:.4}", h1.precision));

    let methods = [
        Method::Index(Strategy::Minute1),
        Method::Index(Strategy::Minute5),
        Method::Index(Strategy::Hour1),
        Method::Index(Strategy::Timehash),
        Method::ScopeFilter,
    ];
    let e2e = end_to_end(&pois, &methods, &sample_queries(1000, 11), &h, 3).unwrap();
    let row = |m| e2e.iter().find(|r| r.method == m).unwrap();
    let scan = row(Method::ScopeFilter);
    for r in e2e.iter().filter(|r| r.method != Method::ScopeFilter) {
        c.check(
            scan.p50 > r.p50,
            format!("scope filter P50 {:.0?} vs {} {:.0?}", scan.p50, r.method, r.p50),
        );
    }
    let (t_build, m_build) =
        (row(Method::Index(Strategy::Timehash)).build_time, row(Method::Index(Strategy::Minute1)).build_time);
    c.check(
        t_build * 10 <= m_build,
        format!("build timehash {t_build:.1?} vs minute1 {m_build:.1?} ({:.0}x)", m_build.as_secs_f64() / t_build.as_secs_f64()),
    );
    c.check(e2e.iter().all(|r| r.recall == 1.0), "recall 1.000 for every method");
    c.close()
}

fn criterion_6_scalability() -> bool {
    let mut c = Criterion::new(6, "scalability");
    let config = calibrate(609.7, &DistributionConfig::default()).unwrap();
    let scales = [100_000, 300_000, 1_000_000];
    let rows = scalability(&scales, &config, &Hierarchy::default(), &sample_queries(1000, 13), 3).unwrap();
    let base = &rows[0];
    for r in &rows {
        c.check(
            (r.terms_per_doc / base.terms_per_doc - 1.0).abs() <= 0.01,
            format!("n={} {:.3} terms/doc", r.n, r.terms_per_doc),
        );
        let linear = base.build_time.as_secs_f64() * r.n as f64 / base.n as f64;
        let ratio = r.build_time.as_secs_f64() / linear;
        c.check(ratio <= 1.5, format!("n={} build {:.1?} = {ratio:.2}x linear", r.n, r.build_time));
        c.check(r.unique_terms <= 300, format!("n={} {} unique keys", r.n, r.unique_terms));
    }
    c.close()
}

fn criterion_7_hierarchy_sweep() -> bool {
    let mut c = Criterion::new(7, "hierarchy sweep");
    let pois = calibrated_pois(100_000);
    let configs = [
        hierarchy(&[60, 5]),
        hierarchy(&[60, 30, 5]),
        hierarchy(&[120, 60, 5]),
        hierarchy(&[120, 60, 30, 5]),
        hierarchy(&[120, 60, 30, 15, 5]),
    ];
    let rows = hierarchy_sweep(&configs, &pois);
    let r: Vec<f64> = rows.iter().map(|row| row.ratio_pct).collect();
    c.check(
        r[0] > r[1] && r[1] > r[2] && r[2] > r[3] && r[3] >= r[4],
        format!("ratios {:?}", r.iter().map(|x| format!("{x:.2}%")).collect::<Vec<_>>()),
    );
    c.check((8.0..=13.0).contains(&r[0]), format!("(60,5) ratio {:.2}%", r[0]));
    c.close()
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_timehash")).args(args).output().unwrap()
}

fn criterion_8_determinism() -> bool {
    let mut c = Criterion::new(8, "determinism");
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for path in [&a, &b] {
        let out = run(&["gen", "--seed", "42", "--n", "100000", "--out", path.to_str().unwrap()]);
        c.check(out.status.success(), format!("gen exit {:?}", out.status.code()));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    c.check(x == y && x.iter().filter(|&&b| b == b'\n').count() == 100_000, format!("gen output {} bytes twice", x.len()));
    for args in [&["keys", "--from", "1140", "--to", "2100"][..], &["query", "--at", "1430"]] {
        let (first, second) = (run(args), run(args));
        c.check(
            first.status.success() && first.stdout == second.stdout,
            format!("{} stable ({} bytes)", args[0], first.stdout.len()),
        );
    }
    c.check(
        run(&["keys", "--from", "1140", "--to", "2100"]).stdout == b"08113040\n081145\n12\n16\n2020\n",
        "keys output",
    );
    c.close()
}

fn main() {
    let criteria: [(u32, fn() -> bool); 8] = [
        (1, criterion_1_worked_key_sets),
        (2, criterion_2_oracle_equivalence),
        (3, criterion_3_key_count_bounds),
        (4, criterion_4_ablation),
        (5, criterion_5_index_size_comparison),
        (6, criterion_6_scalability),
        (7, criterion_7_hierarchy_sweep),
        (8, criterion_8_determinism),
    ];
    let mut failed = 0;
    for (id, criterion) in criteria {
        match panic::catch_unwind(criterion) {
            Ok(true) => {}
            Ok(false) => failed += 1,
            Err(_) => {
                println!("criterion {id}: FAIL | panicked");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
