use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::results::{read_results, EvaluationRecord, ResultLine};
use super::single::DataSource;
use crate::error::{Error, Result};
use crate::metrics::MetricName;
use crate::noise::NoiseKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    /// AUC against one fairness metric per series and rate, for each scenario.
    Tradeoff,
    /// Training-set reconstruction score per method and rate.
    Reconstruction,
    /// M_c evaluated on the original test set against the corrected one.
    Scenario3,
}

impl ReportKind {
    pub const ALL: [ReportKind; 3] = [ReportKind::Tradeoff, ReportKind::Reconstruction, ReportKind::Scenario3];

    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::Tradeoff => "tradeoff",
            ReportKind::Reconstruction => "reconstruction",
            ReportKind::Scenario3 => "scenario3",
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReportKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let valid: Vec<&str> = ReportKind::ALL.iter().map(|k| k.as_str()).collect();
            Error::validation(format!("unknown report kind `{s}`; valid kinds: {}", valid.join(", ")))
        })
    }
}

/// Mean and sample standard deviation of the well-defined values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

pub(crate) fn summarize(values: &[f64]) -> Summary {
    let defined: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n = defined.len();
    if n == 0 {
        return Summary { n, mean: f64::NAN, std: f64::NAN };
    }
    let mean = defined.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (defined.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Summary { n, mean, std }
}

fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

type Key = (String, NoiseKind, u8, String, u64);

/// Distinct measurements keyed by (dataset, kind, scenario, series, rate
/// bits, seed, metric). Baseline models do not depend on the correction
/// method, so their records repeat once per method and collapse here.
fn collect(records: &[EvaluationRecord]) -> BTreeMap<(Key, u64, MetricName), f64> {
    let mut out = BTreeMap::new();
    for r in records {
        let Some(scenario) = r.scenario() else {
            continue;
        };
        let series = match r.train_source {
            DataSource::Corrected => r.method.clone(),
            DataSource::Noisy => "noisy".to_owned(),
            DataSource::Original => "original".to_owned(),
        };
        let value = if r.well_defined { r.value } else { f64::NAN };
        out.entry(((r.dataset.clone(), r.noise_kind, scenario, series, r.rate.to_bits()), r.seed, r.metric))
            .or_insert(value);
    }
    out
}

fn records_of(path: &Path) -> Result<Vec<EvaluationRecord>> {
    if !path.is_file() {
        return Err(Error::Config(format!("results file {} not found", path.display())));
    }
    Ok(read_results(path)?
        .into_iter()
        .filter_map(|l| match l {
            ResultLine::Record(r) => Some(r),
            _ => None,
        })
        .collect())
}

fn default_out(results: &Path, kind: ReportKind, metric: MetricName) -> PathBuf {
    let stem = results.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    results.with_file_name(format!("{stem}_{kind}_{}.csv", metric.as_str()))
}

/// Aggregates a results file over seeds and writes one CSV table. Returns
/// the path written; `out` defaults to a sibling of the results file.
pub fn emit_report(results: &Path, kind: ReportKind, metric: MetricName, out: Option<&Path>) -> Result<PathBuf> {
    if kind == ReportKind::Reconstruction && metric != MetricName::Reconstruction {
        return Err(Error::validation(format!(
            "the reconstruction report takes metric `reconstruction`, not `{}`",
            metric.as_str()
        )));
    }
    if kind != ReportKind::Reconstruction && metric == MetricName::Reconstruction {
        return Err(Error::validation(format!(
            "metric `reconstruction` is only available in the reconstruction report, not `{kind}`"
        )));
    }
    let records = records_of(results)?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| default_out(results, kind, metric));
    let table = match kind {
        ReportKind::Tradeoff => tradeoff(&records, metric),
        ReportKind::Reconstruction => reconstruction(&records),
        ReportKind::Scenario3 => scenario3(&records, metric),
    };
    let mut w = csv::Writer::from_path(&out).map_err(|e| Error::Config(format!("cannot write {}: {e}", out.display())))?;
    let csv_err = |e: csv::Error| Error::Config(format!("cannot write {}: {e}", out.display()));
    for row in table {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&out, e))?;
    Ok(out)
}

fn tradeoff(records: &[EvaluationRecord], metric: MetricName) -> Vec<Vec<String>> {
    let mut metrics = vec![MetricName::Auc];
    if metric != MetricName::Auc {
        metrics.push(metric);
    }
    let mut header: Vec<String> = ["dataset", "noise_kind", "scenario", "series", "rate", "n"]
        .map(String::from)
        .to_vec();
    for m in &metrics {
        header.push(format!("{}_mean", m.as_str()));
        header.push(format!("{}_std", m.as_str()));
    }
    let values = collect(records);
    let mut grouped: BTreeMap<&Key, BTreeMap<MetricName, Vec<f64>>> = BTreeMap::new();
    for ((key, _seed, m), v) in &values {
        if metrics.contains(m) {
            grouped.entry(key).or_default().entry(*m).or_default().push(*v);
        }
    }
    let mut rows = vec![header];
    for ((dataset, kind, scenario, series, rate), by_metric) in grouped {
        let mut row = vec![
            dataset.clone(),
            kind.to_string(),
            scenario.to_string(),
            series.clone(),
            f64::from_bits(*rate).to_string(),
        ];
        let summaries: Vec<Summary> = metrics
            .iter()
            .map(|m| summarize(by_metric.get(m).map(Vec::as_slice).unwrap_or(&[])))
            .collect();
        row.push(summaries.iter().map(|s| s.n).max().unwrap_or(0).to_string());
        for s in summaries {
            row.push(cell(s.mean));
            row.push(cell(s.std));
        }
        rows.push(row);
    }
    rows
}

fn reconstruction(records: &[EvaluationRecord]) -> Vec<Vec<String>> {
    let mut grouped: BTreeMap<(String, NoiseKind, String, u64), BTreeMap<u64, f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.metric == MetricName::Reconstruction) {
        let value = if r.well_defined { r.value } else { f64::NAN };
        grouped
            .entry((r.dataset.clone(), r.noise_kind, r.method.clone(), r.rate.to_bits()))
            .or_default()
            .insert(r.seed, value);
    }
    let header = ["dataset", "noise_kind", "method", "rate", "n", "reconstruction_mean", "reconstruction_std"];
    let mut rows = vec![header.map(String::from).to_vec()];
    for ((dataset, kind, method, rate), by_seed) in grouped {
        let s = summarize(&by_seed.into_values().collect::<Vec<_>>());
        rows.push(vec![
            dataset,
            kind.to_string(),
            method,
            f64::from_bits(rate).to_string(),
            s.n.to_string(),
            cell(s.mean),
            cell(s.std),
        ]);
    }
    rows
}

fn scenario3(records: &[EvaluationRecord], metric: MetricName) -> Vec<Vec<String>> {
    let values = collect(records);
    let mut grouped: BTreeMap<(String, NoiseKind, String, u64), [Vec<f64>; 2]> = BTreeMap::new();
    let corrected_series: BTreeSet<&str> = records
        .iter()
        .filter(|r| r.train_source == DataSource::Corrected)
        .map(|r| r.method.as_str())
        .collect();
    for (((dataset, kind, scenario, series, rate), _seed, m), v) in &values {
        if *m != metric || !corrected_series.contains(series.as_str()) {
            continue;
        }
        let slot = match scenario {
            2 => 0,
            3 => 1,
            _ => continue,
        };
        grouped
            .entry((dataset.clone(), *kind, series.clone(), *rate))
            .or_default()[slot]
            .push(*v);
    }
    let name = metric.as_str();
    let mut rows = vec![vec![
        "dataset".to_owned(),
        "noise_kind".to_owned(),
        "method".to_owned(),
        "rate".to_owned(),
        "n".to_owned(),
        format!("original_test_{name}_mean"),
        format!("original_test_{name}_std"),
        format!("corrected_test_{name}_mean"),
        format!("corrected_test_{name}_std"),
    ]];
    for ((dataset, kind, method, rate), [orig, corr]) in grouped {
        let (a, b) = (summarize(&orig), summarize(&corr));
        rows.push(vec![
            dataset,
            kind.to_string(),
            method,
            f64::from_bits(rate).to_string(),
            a.n.max(b.n).to_string(),
            cell(a.mean),
            cell(a.std),
            cell(b.mean),
            cell(b.std),
        ]);
    }
    rows
}
