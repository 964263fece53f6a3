use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{classification_filter, CorrectionResult, Corrector, FitOrConstant};
use crate::dataset::LabelVector;
use crate::error::{Error, Result};

/// Self-training correction: a classification filter splits clean from
/// noisy, then noisy instances are relabeled one at a time, most confidently
/// wrong first, by a model refitted on the growing clean set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StcParams {
    pub filter_folds: usize,
    pub correction_fraction: f64,
}

impl Default for StcParams {
    fn default() -> Self {
        StcParams {
            filter_folds: 5,
            correction_fraction: 0.8,
        }
    }
}

impl StcParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.correction_fraction > 0.0 && self.correction_fraction <= 1.0) {
            return Err(Error::validation(format!(
                "STC correction_fraction must lie in (0, 1], got {}",
                self.correction_fraction
            )));
        }
        if self.filter_folds < 2 {
            return Err(Error::validation("STC needs filter_folds >= 2"));
        }
        Ok(())
    }
}

impl Corrector for StcParams {
    fn label(&self) -> String {
        "STC".into()
    }

    fn correct(&self, x: ArrayView2<'_, f64>, y: &LabelVector, seed: u64) -> Result<CorrectionResult> {
        let mut labels = y.as_slice().to_vec();
        let filter = classification_filter(x, &labels, self.filter_folds, seed)?;
        let mut diag = BTreeMap::new();
        diag.insert("flagged".into(), filter.noisy.len() as f64);
        if filter.noisy.is_empty() {
            return Ok(CorrectionResult::new(y, labels, 0, diag));
        }
        if filter.clean.is_empty() {
            return Err(Error::Correction(
                "classification filter flagged every instance; no clean set to learn from".into(),
            ));
        }
        let budget = (self.correction_fraction * filter.noisy.len() as f64).ceil() as usize;
        let mut clean = filter.clean;
        let mut noisy = filter.noisy;
        let mut relabeled = 0;
        for _ in 0..budget.min(noisy.len()) {
            let model = FitOrConstant::fit(x, &labels, &clean)?;
            let mut best = (f64::NEG_INFINITY, 0, 0);
            for (pos, &i) in noisy.iter().enumerate() {
                let s = model.score_row(x.row(i));
                let wrong = if labels[i] == 1 { 1.0 - s } else { s };
                if wrong > best.0 {
                    best = (wrong, pos, u8::from(s >= 0.5));
                }
            }
            let (_, pos, pred) = best;
            let i = noisy.remove(pos);
            if labels[i] != pred {
                relabeled += 1;
            }
            labels[i] = pred;
            let at = clean.partition_point(|&c| c < i);
            clean.insert(at, i);
        }
        diag.insert("relabeled".into(), relabeled as f64);
        Ok(CorrectionResult::new(y, labels, budget, diag))
    }
}
