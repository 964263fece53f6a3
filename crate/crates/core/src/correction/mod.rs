//! Label-noise correction methods behind one interface.
//!
//! Every corrector sees the feature matrix and the observed labels only; the
//! group flags are never passed in, so any fairness effect comes from the
//! relabeling itself.

mod be;
mod cc;
mod filter;
mod hlnc;
mod obnc;
mod pl;
mod stc;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use be::BeParams;
pub use cc::{cluster_weight, CcParams};
pub use filter::{classification_filter, FilterOutcome};
pub use hlnc::{HlncParams, HlncVoters, ModelVoters};
pub use obnc::{obnc_ranking, ObncParams};
pub use pl::PlParams;
pub use stc::StcParams;

use crate::dataset::{Dataset, LabelVector};
use crate::error::{Error, Result};
use crate::learners::{LogRegParams, LogisticRegression, Scorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MethodId {
    Be,
    Pl,
    Stc,
    Cc,
    Obnc,
    Hlnc,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::Be,
        MethodId::Pl,
        MethodId::Stc,
        MethodId::Cc,
        MethodId::Obnc,
        MethodId::Hlnc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::Be => "BE",
            MethodId::Pl => "PL",
            MethodId::Stc => "STC",
            MethodId::Cc => "CC",
            MethodId::Obnc => "OBNC",
            MethodId::Hlnc => "HLNC",
        }
    }

    /// The method with default hyperparameters.
    pub fn default_params(self) -> MethodParams {
        match self {
            MethodId::Be => MethodParams::Be(BeParams::default()),
            MethodId::Pl => MethodParams::Pl(PlParams::default()),
            MethodId::Stc => MethodParams::Stc(StcParams::default()),
            MethodId::Cc => MethodParams::Cc(CcParams::default()),
            MethodId::Obnc => MethodParams::Obnc(ObncParams::default()),
            MethodId::Hlnc => MethodParams::Hlnc(HlncParams::default()),
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::validation(format!(
                    "unknown correction method `{s}`; expected one of BE, PL, STC, CC, OBNC, HLNC"
                ))
            })
    }
}

/// Outcome of one correction call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub corrected: LabelVector,
    pub changed_mask: Vec<bool>,
    pub iterations_used: usize,
    pub diagnostics: BTreeMap<String, f64>,
}

impl CorrectionResult {
    pub fn new(
        input: &LabelVector,
        corrected: Vec<u8>,
        iterations_used: usize,
        diagnostics: BTreeMap<String, f64>,
    ) -> Self {
        let changed_mask = input
            .as_slice()
            .iter()
            .zip(&corrected)
            .map(|(a, b)| a != b)
            .collect();
        CorrectionResult {
            corrected: LabelVector::new(corrected).expect("correctors emit binary labels"),
            changed_mask,
            iterations_used,
            diagnostics,
        }
    }

    pub fn identity(input: &LabelVector) -> Self {
        Self::new(input, input.as_slice().to_vec(), 0, BTreeMap::new())
    }

    pub fn changed(&self) -> usize {
        self.changed_mask.iter().filter(|&&c| c).count()
    }
}

/// A label-noise correction method.
pub trait Corrector: Sync {
    /// Name recorded in results files.
    fn label(&self) -> String;

    fn correct(&self, x: ArrayView2<'_, f64>, y: &LabelVector, seed: u64) -> Result<CorrectionResult>;
}

/// Method-specific hyperparameters, tagged by method id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method")]
pub enum MethodParams {
    #[serde(rename = "BE")]
    Be(BeParams),
    #[serde(rename = "PL")]
    Pl(PlParams),
    #[serde(rename = "STC")]
    Stc(StcParams),
    #[serde(rename = "CC")]
    Cc(CcParams),
    #[serde(rename = "OBNC")]
    Obnc(ObncParams),
    #[serde(rename = "HLNC")]
    Hlnc(HlncParams),
}

impl MethodParams {
    pub fn id(&self) -> MethodId {
        match self {
            MethodParams::Be(_) => MethodId::Be,
            MethodParams::Pl(_) => MethodId::Pl,
            MethodParams::Stc(_) => MethodId::Stc,
            MethodParams::Cc(_) => MethodId::Cc,
            MethodParams::Obnc(_) => MethodId::Obnc,
            MethodParams::Hlnc(_) => MethodId::Hlnc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MethodParams::Be(_) => Ok(()),
            MethodParams::Pl(p) => p.validate(),
            MethodParams::Stc(p) => p.validate(),
            MethodParams::Cc(p) => p.validate(),
            MethodParams::Obnc(p) => p.validate(),
            MethodParams::Hlnc(p) => p.validate(),
        }
    }

    /// Upper bound on `iterations_used` for an input of `n` rows.
    pub fn iteration_cap(&self, n: usize) -> usize {
        match self {
            MethodParams::Be(p) => p.max_rounds,
            MethodParams::Pl(_) | MethodParams::Obnc(_) => 1,
            MethodParams::Stc(_) => n,
            MethodParams::Cc(p) => p.k_values.len(),
            MethodParams::Hlnc(p) => p.max_iterations,
        }
    }

    fn as_corrector(&self) -> &dyn Corrector {
        match self {
            MethodParams::Be(p) => p,
            MethodParams::Pl(p) => p,
            MethodParams::Stc(p) => p,
            MethodParams::Cc(p) => p,
            MethodParams::Obnc(p) => p,
            MethodParams::Hlnc(p) => p,
        }
    }
}

impl Corrector for MethodParams {
    fn label(&self) -> String {
        self.id().to_string()
    }

    fn correct(&self, x: ArrayView2<'_, f64>, y: &LabelVector, seed: u64) -> Result<CorrectionResult> {
        self.validate()?;
        if x.nrows() != y.len() {
            return Err(Error::validation(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        self.as_corrector().correct(x, y, seed)
    }
}

/// A configured method together with its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionMethod {
    #[serde(flatten)]
    pub params: MethodParams,
    pub seed: u64,
}

impl CorrectionMethod {
    pub fn new(params: MethodParams, seed: u64) -> Self {
        CorrectionMethod { params, seed }
    }

    pub fn id(&self) -> MethodId {
        self.params.id()
    }

    /// Corrects a dataset's labels. Only the features and labels are read.
    pub fn apply(&self, train: &Dataset) -> Result<CorrectionResult> {
        self.params.correct(train.features(), train.labels(), self.seed)
    }
}

/// Indices per label, shuffled and dealt round-robin into `k` folds.
pub(crate) fn stratified_folds(y: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::validation(format!("need at least 2 folds, got {k}")));
    }
    if k > y.len() {
        return Err(Error::validation(format!(
            "{k} folds for only {} instances",
            y.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in 0..=1u8 {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Rows of `0..n` not in `fold` (sorted input).
pub(crate) fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - fold.len());
    let mut j = 0;
    for i in 0..n {
        if j < fold.len() && fold[j] == i {
            j += 1;
        } else {
            out.push(i);
        }
    }
    out
}

/// Logistic regression on `rows`, or a constant scorer when those rows hold
/// one class only.
pub(crate) enum FitOrConstant {
    Model(Box<LogisticRegression>),
    Constant(u8),
}

impl FitOrConstant {
    pub(crate) fn fit(x: ArrayView2<'_, f64>, y: &[u8], rows: &[usize]) -> Result<Self> {
        let ys: Vec<u8> = rows.iter().map(|&i| y[i]).collect();
        let pos = ys.iter().filter(|&&v| v == 1).count();
        if pos == 0 || pos == ys.len() {
            let class = ys.first().copied().ok_or_else(|| {
                Error::Correction("cannot fit a model on zero instances".into())
            })?;
            return Ok(FitOrConstant::Constant(class));
        }
        let xs = x.select(ndarray::Axis(0), rows);
        let m = LogisticRegression::fit(xs.view(), &ys, &LogRegParams::default())?;
        Ok(FitOrConstant::Model(Box::new(m)))
    }

    pub(crate) fn score_row(&self, row: ndarray::ArrayView1<'_, f64>) -> f64 {
        match self {
            FitOrConstant::Model(m) => m.score_row(row),
            FitOrConstant::Constant(c) => f64::from(*c),
        }
    }
}

pub(crate) fn degenerate_to_correction(e: Error) -> Error {
    match e {
        Error::DegenerateFit(msg) => Error::Correction(msg),
        other => other,
    }
}
