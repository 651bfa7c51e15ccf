use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use timehash::bench::{self, BenchReport, Method, Tabular};
use timehash::datagen::{generate, DistributionConfig};
use timehash::index::{build_index, read_jsonl, write_jsonl, Strategy};
use timehash::{document_terms, parse_hhmm, point_query_terms, split_wrapping, Hierarchy};

#[derive(Parser)]
#[command(name = "timehash", version, about = "Hierarchical time keys for opening-hours filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct HierarchyArg {
    /// Block sizes in minutes, coarsest first.
    #[arg(long, default_value = "240,60,15,5,1")]
    hierarchy: Hierarchy,
}

#[derive(Subcommand)]
enum Command {
    /// Print the index keys of an opening range, one per line.
    Keys {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[command(flatten)]
        h: HierarchyArg,
        /// Day tag prepended to every key.
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Print the point-query keys of a minute, coarsest first.
    Query {
        #[arg(long)]
        at: String,
        #[command(flatten)]
        h: HierarchyArg,
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Answer a file of hhmm queries against a JSONL POI file.
    ServeBatch {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[command(flatten)]
        h: HierarchyArg,
        #[arg(long, default_value = "timehash")]
        strategy: Strategy,
    },
    /// Generate synthetic POIs as JSONL.
    Gen {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// TOML file with distribution parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check key matching against the linear-scan oracle.
    Verify {
        /// Every range of the day, plus the exhaustive reduced-day check.
        #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
        exhaustive: bool,
        /// Number of random ranges.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        h: HierarchyArg,
    },
    /// Run one experiment and write its report.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Keystats,
    Ablation,
    Indexsize,
    E2e,
    Scale,
    Sweep,
}

#[derive(Args)]
struct BenchArgs {
    experiment: Experiment,
    #[command(flatten)]
    h: HierarchyArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Number of sampled point queries.
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    /// Document counts for the scalability experiment.
    #[arg(long, value_delimiter = ',', default_value = "100000,300000,1000000")]
    scales: Vec<usize>,
    /// Builds per index; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Usage(anyhow::Error),
    Mismatch(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Keys { from, to, h, prefix } => keys(&from, &to, &h.hierarchy, prefix.as_deref())?,
        Command::Query { at, h, prefix } => query(&at, &h.hierarchy, prefix.as_deref())?,
        Command::ServeBatch { index, queries, h, strategy } => serve_batch(&index, &queries, &h.hierarchy, strategy)?,
        Command::Gen { n, seed, config, out } => gen(n, seed, config.as_deref(), &out)?,
        Command::Verify { exhaustive, samples, seed, h } => verify(exhaustive, samples, seed, &h.hierarchy)?,
        Command::Bench(args) => run_bench(&args)?,
    }
    Ok(())
}

fn print_lines<I: IntoIterator<Item = S>, S: AsRef<str>>(lines: I) -> anyhow::Result<()> {
    let mut out = BufWriter::new(io::stdout().lock());
    for line in lines {
        writeln!(out, "{}", line.as_ref())?;
    }
    out.flush()?;
    Ok(())
}

fn keys(from: &str, to: &str, h: &Hierarchy, prefix: Option<&str>) -> anyhow::Result<()> {
    let start = parse_hhmm(from).with_context(|| format!("--from {from:?}"))?;
    let end = parse_hhmm(to).with_context(|| format!("--to {to:?}"))?;
    let ranges = split_wrapping(start, end, false);
    print_lines(document_terms(&ranges, h, prefix))
}

fn query(at: &str, h: &Hierarchy, prefix: Option<&str>) -> anyhow::Result<()> {
    let t = parse_hhmm(at).with_context(|| format!("--at {at:?}"))?;
    let keys = point_query_terms(t, h)?;
    let prefix = prefix.unwrap_or("");
    print_lines(keys.iter().map(|k| format!("{prefix}{k}")))
}

fn serve_batch(index: &Path, queries: &Path, h: &Hierarchy, strategy: Strategy) -> anyhow::Result<()> {
    let file = File::open(index).with_context(|| format!("opening {}", index.display()))?;
    let pois = read_jsonl(BufReader::new(file)).with_context(|| format!("reading {}", index.display()))?;
    let file = File::open(queries).with_context(|| format!("opening {}", queries.display()))?;
    let mut minutes = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let t = parse_hhmm(line.trim())
            .ok()
            .filter(|t| t.is_query_minute())
            .with_context(|| format!("{} line {}: {line:?} is not a query time", queries.display(), i + 1))?;
        minutes.push(t);
    }
    let index = build_index(strategy, h, &pois)?;
    let mut lines = Vec::with_capacity(minutes.len());
    for t in minutes {
        let ids: BTreeSet<&str> = index.resolve(&index.point_query(t)?.docs).into_iter().collect();
        lines.push(ids.into_iter().collect::<Vec<_>>().join(" "));
    }
    print_lines(lines)
}

fn gen(n: Option<usize>, seed: Option<u64>, config: Option<&Path>, out: &Path) -> anyhow::Result<()> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            DistributionConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => DistributionConfig::default(),
    };
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let pois = generate(&cfg)?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut writer = BufWriter::new(file);
    write_jsonl(&pois, &mut writer)?;
    writer.flush()?;
    Ok(())
}

fn verify(exhaustive: bool, samples: Option<usize>, seed: u64, h: &Hierarchy) -> Result<(), Failure> {
    let mut reports = Vec::new();
    if exhaustive {
        reports.push(("all ranges of the day", bench::verify_exhaustive(h, seed)));
        let reduced = Hierarchy::new(&[60, 15, 5, 1]).map_err(anyhow::Error::from)?;
        reports.push(("240-minute day, 60,15,5,1", bench::verify_reduced_day(&reduced, 240)));
    } else if let Some(samples) = samples {
        reports.push(("sampled ranges", bench::verify_sampled(h, samples, seed)));
    }
    let mut failed = false;
    for (name, r) in &reports {
        println!("{name}: {} ranges, {} checks, {} mismatches", r.ranges, r.checks, r.mismatches);
        for e in &r.examples {
            println!("  {e}");
        }
        failed |= !r.is_clean();
    }
    if failed {
        return Err(Failure::Mismatch("verification found mismatches".into()));
    }
    Ok(())
}

fn sweep_hierarchies() -> Vec<Hierarchy> {
    [&[5][..], &[60, 5], &[60, 30, 5], &[120, 60, 5], &[120, 60, 30, 5], &[120, 60, 30, 15, 5]]
        .into_iter()
        .map(|m| Hierarchy::new(m).expect("valid"))
        .collect()
}

fn ablation_variants() -> Vec<Hierarchy> {
    [&[60, 15, 5, 1][..], &[240, 60, 1], &[240, 60, 30, 15, 5, 1]]
        .into_iter()
        .map(|m| Hierarchy::new(m).expect("valid"))
        .collect()
}

fn report<T: Tabular>(rows: &[T], args: &BenchArgs, extra: &[(&str, String)]) -> BenchReport {
    let mut pairs = vec![("hierarchy", args.h.hierarchy.to_string())];
    pairs.extend(extra.iter().cloned());
    BenchReport::from_rows(rows, bench::env(&pairs))
}

fn run_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let h = &args.h.hierarchy;
    let data = || {
        let cfg = DistributionConfig { n: args.n, seed: args.seed, ..DistributionConfig::default() };
        generate(&cfg)
    };
    let data_env = [("seed", args.seed.to_string()), ("n", args.n.to_string()), ("queries", args.queries.to_string())];
    let queries = || bench::sample_queries(args.queries, args.seed);
    let report = match args.experiment {
        Experiment::Keystats => report(&bench::enumerate_key_stats(h).rows(), args, &[]),
        Experiment::Ablation => report(&bench::ablation(h, &ablation_variants()), args, &[]),
        Experiment::Indexsize => {
            let rows = bench::index_size_comparison(&data()?, &Strategy::ALL, &queries(), h)?;
            report(&rows, args, &data_env)
        }
        Experiment::E2e => {
            let mut methods: Vec<Method> = Strategy::ALL.into_iter().map(Method::Index).collect();
            methods.push(Method::ScopeFilter);
            let rows = bench::end_to_end(&data()?, &methods, &queries(), h, args.repeats)?;
            report(&rows, args, &data_env)
        }
        Experiment::Scale => {
            if args.scales.windows(2).any(|w| w[0] >= w[1]) {
                bail!("--scales must be ascending");
            }
            let cfg = DistributionConfig { seed: args.seed, ..DistributionConfig::default() };
            let rows = bench::scalability(&args.scales, &cfg, h, &queries(), args.repeats)?;
            report(&rows, args, &[("seed", args.seed.to_string()), ("queries", args.queries.to_string())])
        }
        Experiment::Sweep => {
            let rows = bench::hierarchy_sweep(&sweep_hierarchies(), &data()?);
            report(&rows, args, &data_env[..2])
        }
    };
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    if args.json {
        report.write_json(&mut out)?;
        writeln!(out)?;
    } else {
        report.write_csv(&mut out)?;
    }
    out.flush()?;
    Ok(())
}
