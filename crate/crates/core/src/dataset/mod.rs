//! Binary-classification datasets with a designated sensitive attribute.
//!
//! A [`Dataset`] holds an encoded feature matrix, the binary labels (positive
//! class encoded as 1) and the binary group flags (protected group encoded as
//! 1). The sensitive column never appears among the features.

mod arff;
mod config;
mod delimited;
pub mod openml;
pub mod registry;
pub mod synthetic;
mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{CategoricalEncoding, DatasetConfig, DatasetSource, EncodingRules};
pub use table::LoadedDataset;

use crate::error::{Error, Result};
use crate::noise::NoiseSpec;

/// Ordered binary labels; 1 is always the positive class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct LabelVector(Vec<u8>);

impl LabelVector {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(Error::validation(format!(
                "label at index {pos} is {}, expected 0 or 1",
                values[pos]
            )));
        }
        Ok(LabelVector(values))
    }

    pub fn from_bools(values: impl IntoIterator<Item = bool>) -> Self {
        LabelVector(values.into_iter().map(u8::from).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn count_positive(&self) -> usize {
        self.0.iter().filter(|&&v| v == 1).count()
    }

    /// Both classes present.
    pub fn has_both_classes(&self) -> bool {
        let pos = self.count_positive();
        pos > 0 && pos < self.len()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub(crate) fn select(&self, indices: &[usize]) -> LabelVector {
        LabelVector(indices.iter().map(|&i| self.0[i]).collect())
    }
}

impl TryFrom<Vec<u8>> for LabelVector {
    type Error = Error;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        LabelVector::new(v)
    }
}

impl From<LabelVector> for Vec<u8> {
    fn from(v: LabelVector) -> Self {
        v.0
    }
}

/// Per-instance protected-group flags (1 = protected).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct GroupAssignment(Vec<u8>);

impl GroupAssignment {
    pub fn new(flags: Vec<u8>) -> Result<Self> {
        if let Some(pos) = flags.iter().position(|&v| v > 1) {
            return Err(Error::validation(format!(
                "group flag at index {pos} is {}, expected 0 or 1",
                flags[pos]
            )));
        }
        Ok(GroupAssignment(flags))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn count_protected(&self) -> usize {
        self.0.iter().filter(|&&v| v == 1).count()
    }

    pub fn has_both_groups(&self) -> bool {
        let p = self.count_protected();
        p > 0 && p < self.len()
    }

    /// Swaps the encoding g <-> 1-g.
    pub fn flipped(&self) -> GroupAssignment {
        GroupAssignment(self.0.iter().map(|&g| 1 - g).collect())
    }

    pub(crate) fn select(&self, indices: &[usize]) -> GroupAssignment {
        GroupAssignment(indices.iter().map(|&i| self.0[i]).collect())
    }
}

impl TryFrom<Vec<u8>> for GroupAssignment {
    type Error = Error;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        GroupAssignment::new(v)
    }
}

impl From<GroupAssignment> for Vec<u8> {
    fn from(v: GroupAssignment) -> Self {
        v.0
    }
}

/// Where a dataset view's labels came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Noisy(NoiseSpec),
    /// Corrected by the named method.
    Corrected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Array2<f64>,
    feature_names: Vec<String>,
    labels: LabelVector,
    group: GroupAssignment,
    provenance: Provenance,
}

impl Dataset {
    /// Builds an original-provenance dataset, checking every invariant.
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: LabelVector,
        group: GroupAssignment,
    ) -> Result<Self> {
        let names = (0..features.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_feature_names(name, features, names, labels, group)
    }

    pub fn with_feature_names(
        name: impl Into<String>,
        features: Array2<f64>,
        feature_names: Vec<String>,
        labels: LabelVector,
        group: GroupAssignment,
    ) -> Result<Self> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::validation("dataset has no rows"));
        }
        if labels.len() != n || group.len() != n {
            return Err(Error::validation(format!(
                "length mismatch: {n} feature rows, {} labels, {} group flags",
                labels.len(),
                group.len()
            )));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::validation(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if let Some(((i, j), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite feature value {v} at row {i}, column {j}"
            )));
        }
        Ok(Dataset {
            name: name.into(),
            features,
            feature_names,
            labels,
            group,
            provenance: Provenance::Original,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &LabelVector {
        &self.labels
    }

    pub fn group(&self) -> &GroupAssignment {
        &self.group
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// A new view sharing features and groups with replaced labels.
    pub fn with_labels(&self, labels: LabelVector, provenance: Provenance) -> Result<Dataset> {
        if labels.len() != self.len() {
            return Err(Error::validation(format!(
                "label vector has {} entries, dataset has {} rows",
                labels.len(),
                self.len()
            )));
        }
        Ok(Dataset {
            labels,
            provenance,
            ..self.clone()
        })
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select(Axis(0), indices),
            feature_names: self.feature_names.clone(),
            labels: self.labels.select(indices),
            group: self.group.select(indices),
            provenance: self.provenance.clone(),
        }
    }

    /// Writes the encoded dataset as delimited text: feature columns, then
    /// `group` and `label`. Loading it back with [`Dataset::roundtrip_config`]
    /// reproduces the same dataset.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
            header.push("group");
            header.push("label");
            writeln!(out, "{}", header.join(","))?;
            for (i, row) in self.features.outer_iter().enumerate() {
                let mut cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                cells.push(self.group.get(i).to_string());
                cells.push(self.labels.get(i).to_string());
                writeln!(out, "{}", cells.join(","))?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }

    /// The config matching the layout produced by [`Dataset::write_csv`].
    pub fn roundtrip_config(&self) -> DatasetConfig {
        DatasetConfig {
            name: self.name.clone(),
            source: DatasetSource::Path("data.csv".into()),
            target: "label".into(),
            positive: "1".into(),
            sensitive: "group".into(),
            protected: "1".into(),
            drop: Vec::new(),
            delimiter: ',',
            missing: vec![String::new()],
            encoding: EncodingRules::default(),
        }
    }
}

/// Aggregates in the shape of a dataset-characterization table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub instances: usize,
    /// Encoded feature columns plus the sensitive attribute itself.
    pub features: usize,
    pub positive: f64,
    pub protected: f64,
    pub positive_given_protected: f64,
    pub positive_given_unprotected: f64,
}

impl DatasetSummary {
    pub fn header() -> &'static str {
        "dataset\tinstances\tfeatures\t%positive\t%protected\t%positive|protected\t%positive|unprotected"
    }

    pub fn table_row(&self, name: &str) -> String {
        format!(
            "{name}\t{}\t{}\t{:.0}\t{:.0}\t{:.0}\t{:.0}",
            self.instances,
            self.features,
            self.positive * 100.0,
            self.protected * 100.0,
            self.positive_given_protected * 100.0,
            self.positive_given_unprotected * 100.0
        )
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn summarize(d: &Dataset) -> DatasetSummary {
    let n = d.len();
    let mut counts = [[0usize; 2]; 2]; // [group][label]
    for i in 0..n {
        counts[d.group.get(i) as usize][d.labels.get(i) as usize] += 1;
    }
    let protected = counts[1][0] + counts[1][1];
    let unprotected = counts[0][0] + counts[0][1];
    DatasetSummary {
        instances: n,
        features: d.n_features() + 1,
        positive: ratio(counts[0][1] + counts[1][1], n),
        protected: ratio(protected, n),
        positive_given_protected: ratio(counts[1][1], protected),
        positive_given_unprotected: ratio(counts[0][1], unprotected),
    }
}

/// Train/test partition of a dataset, with the source row indices kept.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Stratified split by the joint (label, group) cell.
///
/// Each cell of size `m` contributes `round(test_fraction * m)` rows to the
/// test half, clamped so both halves keep at least one row of the cell.
pub fn split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::validation(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut cells: BTreeMap<(u8, u8), Vec<usize>> = BTreeMap::new();
    for i in 0..d.len() {
        cells
            .entry((d.labels.get(i), d.group.get(i)))
            .or_default()
            .push(i);
    }
    for label in 0..=1u8 {
        for group in 0..=1u8 {
            let size = cells.get(&(label, group)).map_or(0, Vec::len);
            if size < 2 {
                return Err(Error::Split(format!(
                    "cell label={label}, group={group} has {size} member(s); at least 2 required"
                )));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(d.len());
    let mut test = Vec::new();
    for members in cells.values_mut() {
        members.shuffle(&mut rng);
        let m = members.len();
        let n_test = ((test_fraction * m as f64).round() as usize).clamp(1, m - 1);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train: d.subset(&train),
        test: d.subset(&test),
        train_indices: train,
        test_indices: test,
    })
}

/// Reads a dataset from a local file according to `config`.
///
/// The format is chosen by extension: `.arff` is parsed as attribute-relation
/// format, anything else as delimited text with a header row.
pub fn load_local(path: &Path, config: &DatasetConfig) -> Result<LoadedDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_arff = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("arff"));
    load_str(&text, is_arff, config)
}

/// Like [`load_local`] for in-memory text.
pub fn load_str(text: &str, is_arff: bool, config: &DatasetConfig) -> Result<LoadedDataset> {
    let raw = if is_arff {
        arff::parse(text)?
    } else {
        delimited::parse(text, config)?
    };
    table::encode(raw, config)
}

/// Row and attribute counts of an attribute-relation file, before any
/// configuration is applied.
pub fn arff_shape(path: &Path) -> Result<(usize, usize)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw = arff::parse(&text)?;
    Ok((raw.n_rows, raw.columns.len()))
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Original => write!(f, "original"),
            Provenance::Noisy(spec) => write!(f, "noisy({}, {})", spec.kind, spec.rate),
            Provenance::Corrected(m) => write!(f, "corrected({m})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy() -> Dataset {
        Dataset::new(
            "toy",
            array![[0.0], [1.0], [2.0], [3.0]],
            LabelVector::new(vec![1, 1, 0, 0]).unwrap(),
            GroupAssignment::new(vec![1, 0, 1, 0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn summary_of_hand_countable_dataset() {
        let s = summarize(&toy());
        assert_eq!(s.instances, 4);
        assert_eq!(s.features, 2);
        assert_eq!(s.positive, 0.5);
        assert_eq!(s.protected, 0.5);
        assert_eq!(s.positive_given_protected, 0.5);
        assert_eq!(s.positive_given_unprotected, 0.5);
    }

    #[test]
    fn rejects_non_binary_labels_and_nan() {
        assert!(LabelVector::new(vec![0, 2]).is_err());
        assert!(GroupAssignment::new(vec![3]).is_err());
        let err = Dataset::new(
            "bad",
            array![[f64::NAN]],
            LabelVector::new(vec![1]).unwrap(),
            GroupAssignment::new(vec![0]).unwrap(),
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn length_mismatch_is_validation_error() {
        let err = Dataset::new(
            "bad",
            array![[0.0], [1.0]],
            LabelVector::new(vec![1]).unwrap(),
            GroupAssignment::new(vec![0, 1]).unwrap(),
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    fn balanced(per_cell: usize) -> Dataset {
        let mut labels = Vec::new();
        let mut group = Vec::new();
        for l in 0..2u8 {
            for g in 0..2u8 {
                for _ in 0..per_cell {
                    labels.push(l);
                    group.push(g);
                }
            }
        }
        let n = labels.len();
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        Dataset::new(
            "balanced",
            features,
            LabelVector::new(labels).unwrap(),
            GroupAssignment::new(group).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn split_is_deterministic() {
        let d = balanced(25);
        let a = split(&d, 0.3, 7).unwrap();
        let b = split(&d, 0.3, 7).unwrap();
        assert_eq!(a.test_indices, b.test_indices);
        assert_eq!(a.train_indices, b.train_indices);
        let c = split(&d, 0.3, 8).unwrap();
        assert_ne!(a.test_indices, c.test_indices);
    }

    #[test]
    fn balanced_split_takes_exactly_half_of_each_cell() {
        let d = balanced(10);
        let s = split(&d, 0.5, 1).unwrap();
        let mut cells = [[0usize; 2]; 2];
        for i in 0..s.test.len() {
            cells[s.test.labels().get(i) as usize][s.test.group().get(i) as usize] += 1;
        }
        assert_eq!(cells, [[5, 5], [5, 5]]);
    }

    #[test]
    fn split_is_partition() {
        let d = balanced(13);
        let s = split(&d, 0.3, 3).unwrap();
        assert_eq!(s.train.len() + s.test.len(), d.len());
        let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..d.len()).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_single_member_cell() {
        let d = Dataset::new(
            "tiny",
            Array2::zeros((7, 1)),
            LabelVector::new(vec![1, 0, 0, 1, 1, 0, 0]).unwrap(),
            GroupAssignment::new(vec![1, 1, 1, 0, 0, 0, 0]).unwrap(),
        )
        .unwrap();
        let err = split(&d, 0.5, 0).unwrap_err();
        match err {
            Error::Split(msg) => assert!(msg.contains("label=1, group=1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
