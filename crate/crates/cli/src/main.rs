use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lncfair::dataset::openml::OpenMlClient;
use lncfair::dataset::{arff_shape, registry, summarize, DatasetConfig, DatasetSummary};
use lncfair::experiment::{emit_report, run_grid, ExperimentConfig, ReportKind};
use lncfair::metrics::MetricName;
use lncfair::Error;

#[derive(Parser)]
#[command(name = "lncfair", version, about = "Label-noise correction as a fairness intervention: benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download OpenML datasets into a local cache.
    Fetch {
        /// Comma-separated OpenML dataset ids.
        #[arg(long)]
        ids: String,
        #[arg(long)]
        cache: PathBuf,
    },
    /// Load a dataset config and print its characterization row.
    Summarize {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an experiment grid.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the results path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a results file into a CSV table.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    User(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_user_error() {
            Failure::User(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fetch { ids, cache } => fetch(&ids, &cache),
        Command::Summarize { config } => summarize_cmd(&config),
        Command::Run { config, seed, jobs, out } => run(&config, seed, jobs, out),
        Command::Report { results, kind, metric, out } => report(&results, &kind, &metric, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn parse_ids(text: &str) -> Result<Vec<u32>, Failure> {
    let ids: Vec<u32> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<u32>() {
            Ok(id) if id > 0 => Ok(id),
            _ => Err(Failure::User(format!("`{s}` is not a positive OpenML id"))),
        })
        .collect::<Result<_, _>>()?;
    if ids.is_empty() {
        return Err(Failure::User("no ids given".into()));
    }
    Ok(ids)
}

fn fetch(ids: &str, cache: &Path) -> Result<(), Failure> {
    let ids = parse_ids(ids)?;
    let client = OpenMlClient::default();
    let mut failed = Vec::new();
    for id in ids {
        match client.fetch(id, cache) {
            Ok(outcome) => {
                let status = if outcome.cached { "cached" } else { "fetched" };
                let shape = match arff_shape(&outcome.path) {
                    Ok((rows, cols)) => format!("rows={rows}\tattributes={cols}"),
                    Err(e) => format!("unreadable: {e}"),
                };
                println!("{id}\t{status}\t{}\t{shape}", outcome.path.display());
                if let Some(b) = registry::by_openml_id(id) {
                    let loaded = lncfair::dataset::load_local(&outcome.path, &b.config());
                    if let Ok(l) = loaded {
                        println!("{id}\t{}", summarize(&l.dataset).table_row(b.name));
                    }
                }
            }
            Err(e) => {
                eprintln!("{id}\tfailed\t{e}");
                failed.push(id.to_string());
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("failed ids: {}", failed.join(","))))
    }
}

fn summarize_cmd(config: &Path) -> Result<(), Failure> {
    let cfg = DatasetConfig::from_file(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let loaded = cfg.load(base, &base.join("cache"))?;
    println!("{}", DatasetSummary::header());
    println!("{}", summarize(&loaded.dataset).table_row(&cfg.name));
    if loaded.dropped_rows > 0 {
        println!(
            "dropped {} of {} rows with missing values",
            loaded.dropped_rows, loaded.source_rows
        );
    }
    Ok(())
}

fn run(config: &Path, seed: Option<u64>, jobs: Option<usize>, out: Option<PathBuf>) -> Result<(), Failure> {
    if jobs == Some(0) {
        return Err(Failure::User("--jobs must be at least 1".into()));
    }
    let mut cfg = ExperimentConfig::from_file(config)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(o) = out {
        cfg.output = o;
    }
    let progress = |done: usize, total: usize| {
        let mut err = std::io::stderr().lock();
        let _ = write!(err, "\rcells {done}/{total}");
        if done == total {
            let _ = writeln!(err);
        }
    };
    let summary = run_grid(&cfg, jobs, &progress)?;
    println!("results: {}", summary.path.display());
    println!("cells: {} ({} failed)", summary.cells, summary.failed);
    if summary.failed == summary.cells {
        return Err(Failure::Runtime("every cell failed".into()));
    }
    Ok(())
}

fn report(results: &Path, kind: &str, metric: &str, out: Option<&Path>) -> Result<(), Failure> {
    let kind: ReportKind = kind.parse()?;
    let metric: MetricName = metric.parse()?;
    let path = emit_report(results, kind, metric, out)?;
    println!("{}", path.display());
    Ok(())
}
