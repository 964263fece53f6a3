//! Raw column table shared by the file readers, and its encoding into a
//! [`Dataset`].

use ndarray::Array2;

use super::{CategoricalEncoding, Dataset, DatasetConfig, GroupAssignment, LabelVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) enum Cells {
    Numeric(Vec<Option<f64>>),
    Nominal {
        domain: Vec<String>,
        codes: Vec<Option<usize>>,
    },
}

impl Cells {
    fn is_missing(&self, row: usize) -> bool {
        match self {
            Cells::Numeric(v) => v[row].is_none(),
            Cells::Nominal { codes, .. } => codes[row].is_none(),
        }
    }

    /// Raw textual value of a present cell.
    fn text(&self, row: usize) -> Option<String> {
        match self {
            Cells::Numeric(v) => v[row].map(|x| format!("{x}")),
            Cells::Nominal { domain, codes } => codes[row].map(|c| domain[c].clone()),
        }
    }

    fn matches(&self, row: usize, wanted: &str) -> bool {
        match self {
            Cells::Numeric(v) => match (v[row], wanted.trim().parse::<f64>()) {
                (Some(x), Ok(w)) => x == w,
                _ => false,
            },
            Cells::Nominal { domain, codes } => codes[row].is_some_and(|c| domain[c] == wanted),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RawColumn {
    pub name: String,
    pub cells: Cells,
}

#[derive(Debug, Clone)]
pub(crate) struct RawTable {
    pub columns: Vec<RawColumn>,
    pub n_rows: usize,
}

/// A dataset fresh from disk, with what was discarded on the way.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub source_rows: usize,
    /// Rows removed because a kept column was missing a value.
    pub dropped_rows: usize,
}

fn find(table: &RawTable, name: &str, role: &str) -> Result<usize> {
    table
        .columns
        .iter()
        .position(|c| c.name == name)
        .ok_or_else(|| Error::Config(format!("{role} column `{name}` not found")))
}

/// Maps a two-valued column onto {0,1} with `one_value` -> 1.
fn binary_column(col: &RawColumn, rows: &[usize], one_value: &str, role: &str) -> Result<Vec<u8>> {
    let mut distinct: Vec<String> = Vec::new();
    for &r in rows {
        let v = col.cells.text(r).expect("kept rows have no missing cells");
        if !distinct.contains(&v) {
            distinct.push(v);
        }
    }
    if distinct.len() > 2 {
        return Err(Error::validation(format!(
            "{role} column `{}` is not binary: values {:?}",
            col.name, distinct
        )));
    }
    let out: Vec<u8> = rows
        .iter()
        .map(|&r| u8::from(col.cells.matches(r, one_value)))
        .collect();
    if !out.contains(&1) {
        return Err(Error::validation(format!(
            "{role} value `{one_value}` never occurs in column `{}` (values {:?})",
            col.name, distinct
        )));
    }
    Ok(out)
}

fn ordinal_values(domain: &[String]) -> Vec<f64> {
    let parsed: Option<Vec<f64>> = domain.iter().map(|s| s.trim().parse().ok()).collect();
    parsed.unwrap_or_else(|| (0..domain.len()).map(|i| i as f64).collect())
}

pub(crate) fn encode(table: RawTable, config: &DatasetConfig) -> Result<LoadedDataset> {
    let target = find(&table, &config.target, "target")?;
    let sensitive = find(&table, &config.sensitive, "sensitive")?;
    if target == sensitive {
        return Err(Error::Config(
            "target and sensitive columns must differ".into(),
        ));
    }
    let mut dropped = vec![false; table.columns.len()];
    for name in &config.drop {
        let idx = find(&table, name, "dropped")?;
        if idx == target || idx == sensitive {
            return Err(Error::Config(format!(
                "cannot drop `{name}`: it is the target or sensitive column"
            )));
        }
        dropped[idx] = true;
    }
    let kept_cols: Vec<usize> = (0..table.columns.len()).filter(|&c| !dropped[c]).collect();
    let rows: Vec<usize> = (0..table.n_rows)
        .filter(|&r| kept_cols.iter().all(|&c| !table.columns[c].cells.is_missing(r)))
        .collect();
    if rows.is_empty() {
        return Err(Error::validation(format!(
            "no complete rows left in `{}` after dropping missing values",
            config.name
        )));
    }

    let labels = binary_column(&table.columns[target], &rows, &config.positive, "target")?;
    let group = binary_column(&table.columns[sensitive], &rows, &config.protected, "sensitive")?;

    let mut names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for &c in &kept_cols {
        if c == target || c == sensitive {
            continue;
        }
        let col = &table.columns[c];
        match &col.cells {
            Cells::Numeric(v) => {
                names.push(col.name.clone());
                columns.push(rows.iter().map(|&r| v[r].expect("complete row")).collect());
            }
            Cells::Nominal { domain, codes } => {
                let code = |r: usize| codes[r].expect("complete row");
                match config.encoding.encoding_for(&col.name) {
                    CategoricalEncoding::Ordinal => {
                        let values = ordinal_values(domain);
                        names.push(col.name.clone());
                        columns.push(rows.iter().map(|&r| values[code(r)]).collect());
                    }
                    CategoricalEncoding::OneHot if domain.len() <= 2 => {
                        let level = domain.len() - 1;
                        names.push(format!("{}={}", col.name, domain[level]));
                        columns.push(
                            rows.iter()
                                .map(|&r| if code(r) == level { 1.0 } else { 0.0 })
                                .collect(),
                        );
                    }
                    CategoricalEncoding::OneHot => {
                        for (level, value) in domain.iter().enumerate() {
                            names.push(format!("{}={value}", col.name));
                            columns.push(
                                rows.iter()
                                    .map(|&r| if code(r) == level { 1.0 } else { 0.0 })
                                    .collect(),
                            );
                        }
                    }
                }
            }
        }
    }
    let features = Array2::from_shape_fn((rows.len(), columns.len()), |(i, j)| columns[j][i]);
    let dataset = Dataset::with_feature_names(
        config.name.clone(),
        features,
        names,
        LabelVector::new(labels)?,
        GroupAssignment::new(group)?,
    )?;
    Ok(LoadedDataset {
        dataset,
        source_rows: table.n_rows,
        dropped_rows: table.n_rows - rows.len(),
    })
}
