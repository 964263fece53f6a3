use std::cmp::Ordering;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::single::DataSource;
use crate::error::{Error, Result};
use crate::metrics::{nan_as_null, null_as_nan, MetricName};
use crate::noise::NoiseKind;

pub const SCHEMA_VERSION: u32 = 1;

/// First line of every results file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub schema_version: u32,
    pub config_hash: String,
}

/// One measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationRecord {
    pub dataset: String,
    pub method: String,
    pub noise_kind: NoiseKind,
    pub rate: f64,
    pub seed: u64,
    pub train_source: DataSource,
    pub test_source: DataSource,
    pub metric: MetricName,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    pub value: f64,
    pub well_defined: bool,
}

impl EvaluationRecord {
    /// 1, 2 or 3 by test set (noisy, original, corrected); `None` for the
    /// training-set reconstruction record.
    pub fn scenario(&self) -> Option<u8> {
        if self.metric == MetricName::Reconstruction {
            return None;
        }
        Some(match self.test_source {
            DataSource::Noisy => 1,
            DataSource::Original => 2,
            DataSource::Corrected => 3,
        })
    }
}

/// Marker written in place of a cell's records when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellFailure {
    pub dataset: String,
    pub method: String,
    pub noise_kind: NoiseKind,
    pub rate: f64,
    pub seed: u64,
    pub failure: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResultLine {
    Header(Header),
    Failure(CellFailure),
    Record(EvaluationRecord),
}

impl ResultLine {
    fn cell_key(&self) -> Option<(&str, NoiseKind, f64, &str, u64)> {
        match self {
            ResultLine::Header(_) => None,
            ResultLine::Failure(f) => Some((&f.dataset, f.noise_kind, f.rate, &f.method, f.seed)),
            ResultLine::Record(r) => Some((&r.dataset, r.noise_kind, r.rate, &r.method, r.seed)),
        }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        match (self.cell_key(), other.cell_key()) {
            (None, None) => Ordering::Equal,
            (None, _) => Ordering::Less,
            (_, None) => Ordering::Greater,
            (Some(a), Some(b)) => a
                .0
                .cmp(b.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
                .then(a.3.cmp(b.3))
                .then(a.4.cmp(&b.4))
                .then_with(|| match (self, other) {
                    (ResultLine::Record(x), ResultLine::Record(y)) => (x.train_source, x.test_source, x.metric)
                        .cmp(&(y.train_source, y.test_source, y.metric)),
                    (ResultLine::Failure(_), ResultLine::Record(_)) => Ordering::Less,
                    (ResultLine::Record(_), ResultLine::Failure(_)) => Ordering::Greater,
                    _ => Ordering::Equal,
                }),
        }
    }

    pub(crate) fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result lines serialize")
    }
}

pub fn read_results(path: &Path) -> Result<Vec<ResultLine>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ResultLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            row: i + 1,
            column: String::new(),
            message: format!("bad results line: {e}"),
        })?;
        out.push(parsed);
    }
    Ok(out)
}

/// Rewrites a results file with the header first and every other line in
/// canonical order, so equal grids give byte-identical files.
pub fn canonicalize(path: &Path) -> Result<()> {
    let mut lines = read_results(path)?;
    lines.sort_by(ResultLine::canonical_cmp);
    let tmp = path.with_extension("canonical.tmp");
    {
        let file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = std::io::BufWriter::new(file);
        for l in &lines {
            writeln!(w, "{}", l.to_json()).map_err(|e| Error::io(&tmp, e))?;
        }
        w.flush().map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
