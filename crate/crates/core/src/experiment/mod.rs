//! Experiment orchestration: one cell runs the full noise, correction,
//! training and evaluation pipeline; a grid runs the cartesian product of
//! cells in parallel and streams records to a line-delimited results file.

mod config;
mod grid;
mod report;
mod results;
mod single;

pub use config::{DatasetEntry, ExperimentConfig};
pub use grid::{cell_seeds, run_grid, CellSeeds, GridSummary};
pub use report::{emit_report, ReportKind};
pub use results::{
    canonicalize, read_results, CellFailure, EvaluationRecord, Header, ResultLine, SCHEMA_VERSION,
};
pub use single::{run_single, DataSource, RunSettings, RunSpec};
