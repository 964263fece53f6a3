use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::results::{canonicalize, CellFailure, Header, ResultLine, SCHEMA_VERSION};
use super::single::{run_single, RunSettings, RunSpec};
use crate::correction::{Corrector, MethodParams};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::noise::{NoiseKind, NoiseSpec};

/// Seeds for one cell, all derived from the master seed and the cell
/// coordinates. Split and noise seeds ignore the method (and noise seeds the
/// rate), so every method in a replicate sees the same split and the same
/// uniform draws, and the noisy baseline is shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSeeds {
    pub split: u64,
    pub noise_train: u64,
    pub noise_test: u64,
    pub correction: u64,
    pub test_correction: u64,
}

fn derive(parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0x1f]);
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn cell_seeds(
    master: u64,
    dataset: &str,
    kind: NoiseKind,
    rate: f64,
    method: &str,
    seed: u64,
) -> CellSeeds {
    let master = master.to_string();
    let seed = seed.to_string();
    let rate = format!("{rate:?}");
    let kind = kind.as_str();
    CellSeeds {
        split: derive(&[&master, dataset, &seed, "split"]),
        noise_train: derive(&[&master, dataset, kind, &seed, "noise-train"]),
        noise_test: derive(&[&master, dataset, kind, &seed, "noise-test"]),
        correction: derive(&[&master, dataset, kind, &rate, method, &seed, "correct-train"]),
        test_correction: derive(&[&master, dataset, kind, &rate, method, &seed, "correct-test"]),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSummary {
    pub path: PathBuf,
    pub cells: usize,
    pub failed: usize,
}

struct Cell<'a> {
    dataset: &'a Dataset,
    kind: NoiseKind,
    rate: f64,
    method: &'a MethodParams,
    seed: u64,
}

fn config_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.output = PathBuf::new();
    c.cache_dir = PathBuf::new();
    let json = serde_json::to_string(&c).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs every cell of the grid on at most `jobs` worker threads, streaming
/// records to `config.output` as cells finish, then rewrites the file in
/// canonical order. `progress` receives `(done, total)` after every cell.
pub fn run_grid(
    config: &ExperimentConfig,
    jobs: Option<usize>,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<GridSummary> {
    config.validate()?;
    let out_path = config.output.clone();
    let parent = out_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(Error::Config(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    let datasets: Vec<Dataset> = config
        .datasets
        .iter()
        .map(|d| d.load(Path::new(""), &config.cache_dir))
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(config.cell_count());
    for d in &datasets {
        for &kind in &config.noise_kinds {
            for &rate in &config.rates {
                for method in &config.methods {
                    for &seed in &config.seeds {
                        cells.push(Cell {
                            dataset: d,
                            kind,
                            rate,
                            method,
                            seed,
                        });
                    }
                }
            }
        }
    }

    let file = std::fs::File::create(&out_path)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", out_path.display())))?;
    let mut writer = std::io::BufWriter::new(file);
    let header = ResultLine::Header(Header {
        schema_version: SCHEMA_VERSION,
        config_hash: config_hash(config),
    });
    let io_err = |e| Error::io(&out_path, e);
    writeln!(writer, "{}", header.to_json()).map_err(io_err)?;
    writer.flush().map_err(io_err)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let settings = RunSettings {
        test_fraction: config.test_fraction,
        learner: config.learner,
        threshold: config.threshold,
    };
    let total = cells.len();
    let (tx, rx) = mpsc::channel::<Vec<ResultLine>>();
    let mut failed = 0;
    std::thread::scope(|scope| -> Result<()> {
        let cells = &cells;
        scope.spawn(move || {
            pool.install(|| {
                cells.par_iter().for_each_with(tx, |tx, cell| {
                    let lines = run_cell(cell, config, &settings);
                    let _ = tx.send(lines);
                });
            });
        });
        let mut done = 0;
        for lines in rx {
            for l in &lines {
                if matches!(l, ResultLine::Failure(_)) {
                    failed += 1;
                }
                writeln!(writer, "{}", l.to_json()).map_err(io_err)?;
            }
            writer.flush().map_err(io_err)?;
            done += 1;
            progress(done, total);
        }
        Ok(())
    })?;
    drop(writer);
    canonicalize(&out_path)?;
    Ok(GridSummary {
        path: out_path,
        cells: total,
        failed,
    })
}

fn run_cell(cell: &Cell<'_>, config: &ExperimentConfig, settings: &RunSettings) -> Vec<ResultLine> {
    let name = cell.dataset.name();
    let label = cell.method.label();
    let seeds = cell_seeds(config.master_seed, name, cell.kind, cell.rate, &label, cell.seed);
    let outcome = (|| {
        let spec = RunSpec {
            dataset: cell.dataset,
            noise_train: NoiseSpec::new(cell.kind, cell.rate, seeds.noise_train)?,
            noise_test: NoiseSpec::new(cell.kind, cell.rate, seeds.noise_test)?,
            corrector: cell.method,
            test_corrector: config.test_correction.as_ref().map(|m| m as &dyn Corrector),
            correction_seed: seeds.correction,
            test_correction_seed: seeds.test_correction,
            split_seed: seeds.split,
            seed: cell.seed,
            settings: *settings,
        };
        run_single(&spec)
    })();
    match outcome {
        Ok(records) => records.into_iter().map(ResultLine::Record).collect(),
        Err(e) => vec![ResultLine::Failure(CellFailure {
            dataset: name.to_owned(),
            method: label,
            noise_kind: cell.kind,
            rate: cell.rate,
            seed: cell.seed,
            failure: e.to_string(),
        })],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::read_results;

    #[test]
    fn seeds_are_stable_and_coordinate_sensitive() {
        let a = cell_seeds(1, "d", NoiseKind::PositiveBias, 0.2, "CC", 0);
        assert_eq!(a, cell_seeds(1, "d", NoiseKind::PositiveBias, 0.2, "CC", 0));
        let other_method = cell_seeds(1, "d", NoiseKind::PositiveBias, 0.2, "PL", 0);
        assert_eq!(a.noise_train, other_method.noise_train);
        assert_eq!(a.split, other_method.split);
        assert_ne!(a.correction, other_method.correction);
        assert_ne!(a.noise_train, a.noise_test);
        assert_ne!(a.split, cell_seeds(2, "d", NoiseKind::PositiveBias, 0.2, "CC", 0).split);
    }

    #[test]
    fn one_cell_grid_writes_header_and_records() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::from_toml_str(
            r#"
datasets = [{ synthetic = { n = 200, seed = 1 } }]
noise_kinds = ["positive_bias"]
rates = [0.2]
methods = [{ method = "OBNC" }]
"#,
        )
        .unwrap();
        cfg.output = dir.path().join("out.jsonl");
        let s = run_grid(&cfg, Some(1), &|_, _| {}).unwrap();
        assert_eq!((s.cells, s.failed), (1, 0));
        let lines = read_results(&s.path).unwrap();
        assert_eq!(lines.len(), 38);
        assert!(matches!(lines[0], ResultLine::Header(_)));
    }

    #[test]
    fn missing_output_directory_is_config_error() {
        let mut cfg = ExperimentConfig::from_toml_str("datasets = [{ synthetic = { n = 50, seed = 1 } }]\n").unwrap();
        cfg.output = PathBuf::from("/nonexistent/dir/out.jsonl");
        assert!(matches!(run_grid(&cfg, None, &|_, _| {}), Err(Error::Config(_))));
    }

    #[test]
    fn failing_cells_leave_a_marker() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::from_toml_str(
            r#"
datasets = [{ synthetic = { n = 40, seed = 1 } }]
noise_kinds = ["balanced_bias"]
rates = [0.1]
methods = [{ method = "CC", k_values = [50] }, { method = "PL" }]
"#,
        )
        .unwrap();
        cfg.output = dir.path().join("out.jsonl");
        let s = run_grid(&cfg, Some(2), &|_, _| {}).unwrap();
        assert_eq!((s.cells, s.failed), (2, 1));
        let lines = read_results(&s.path).unwrap();
        assert_eq!(lines.iter().filter(|l| matches!(l, ResultLine::Failure(_))).count(), 1);
        assert_eq!(lines.len(), 1 + 1 + 37);
    }
}
