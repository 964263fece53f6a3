use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{complement, stratified_folds, CorrectionResult, Corrector};
use crate::dataset::LabelVector;
use crate::error::{Error, Result};
use crate::learners::{LogRegParams, LogisticRegression, Scorer};

/// Polishing labels: one logistic model per fold complement, each instance
/// takes the majority vote of all models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlParams {
    pub n_folds: usize,
}

impl Default for PlParams {
    fn default() -> Self {
        PlParams { n_folds: 5 }
    }
}

impl PlParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_folds < 2 {
            return Err(Error::validation(format!(
                "PL needs n_folds >= 2, got {}",
                self.n_folds
            )));
        }
        Ok(())
    }
}

/// Majority of `votes_for_1` out of `total`; an even split keeps `observed`.
pub(crate) fn majority(votes_for_1: usize, total: usize, observed: u8) -> u8 {
    match (2 * votes_for_1).cmp(&total) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => observed,
    }
}

impl Corrector for PlParams {
    fn label(&self) -> String {
        "PL".into()
    }

    fn correct(&self, x: ArrayView2<'_, f64>, y: &LabelVector, seed: u64) -> Result<CorrectionResult> {
        let n = y.len();
        let obs = y.as_slice();
        let folds = stratified_folds(obs, self.n_folds, seed)?;
        let mut votes = vec![0usize; n];
        for fold in &folds {
            let rows = complement(n, fold);
            let ys: Vec<u8> = rows.iter().map(|&i| obs[i]).collect();
            let xs = x.select(ndarray::Axis(0), &rows);
            let m = LogisticRegression::fit(xs.view(), &ys, &LogRegParams::default()).map_err(|e| {
                Error::Correction(format!("PL cannot fit a fold even with stratification: {e}"))
            })?;
            for (v, s) in votes.iter_mut().zip(m.score(x)) {
                *v += usize::from(s >= 0.5);
            }
        }
        let corrected: Vec<u8> = (0..n).map(|i| majority(votes[i], folds.len(), obs[i])).collect();
        let mut diag = BTreeMap::new();
        diag.insert("models".into(), folds.len() as f64);
        Ok(CorrectionResult::new(y, corrected, 1, diag))
    }
}
