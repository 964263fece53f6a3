use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{CorrectionResult, Corrector};
use crate::dataset::LabelVector;
use crate::error::{Error, Result};
use crate::learners::{BaggedTrees, BaggingParams};

/// Ordering-based correction: disagreements with a bagged-tree ensemble are
/// ranked by ensemble margin and the strongest are relabeled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObncParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub relabel_fraction: f64,
}

impl Default for ObncParams {
    fn default() -> Self {
        ObncParams {
            n_trees: 11,
            max_depth: 4,
            relabel_fraction: 1.0,
        }
    }
}

impl ObncParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.relabel_fraction > 0.0 && self.relabel_fraction <= 1.0) {
            return Err(Error::validation(format!(
                "OBNC relabel_fraction must lie in (0, 1], got {}",
                self.relabel_fraction
            )));
        }
        if self.n_trees.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "OBNC n_trees must be odd, got {}",
                self.n_trees
            )));
        }
        Ok(())
    }
}

/// Instances whose ensemble prediction differs from the observed label, as
/// `(index, predicted label, margin)` sorted by |margin| descending, ties by
/// index. The margin is `(votes for predicted - votes against) / n_trees`.
pub fn obnc_ranking(
    x: ArrayView2<'_, f64>,
    y: &LabelVector,
    params: &ObncParams,
    seed: u64,
) -> Result<Vec<(usize, u8, f64)>> {
    let bp = BaggingParams {
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        seed,
    };
    let ens = BaggedTrees::fit(x, y.as_slice(), &bp)?;
    let mut out = Vec::new();
    for (i, row) in x.outer_iter().enumerate() {
        let (ones, zeros) = ens.votes(row);
        let pred = u8::from(ones > zeros);
        if pred != y.get(i) {
            let (forv, against) = if pred == 1 { (ones, zeros) } else { (zeros, ones) };
            out.push((i, pred, (forv as f64 - against as f64) / params.n_trees as f64));
        }
    }
    out.sort_by(|a, b| b.2.abs().total_cmp(&a.2.abs()).then(a.0.cmp(&b.0)));
    Ok(out)
}

impl Corrector for ObncParams {
    fn label(&self) -> String {
        "OBNC".into()
    }

    fn correct(&self, x: ArrayView2<'_, f64>, y: &LabelVector, seed: u64) -> Result<CorrectionResult> {
        let ranking = obnc_ranking(x, y, self, seed)?;
        let take = (self.relabel_fraction * ranking.len() as f64).ceil() as usize;
        let mut labels = y.as_slice().to_vec();
        for &(i, pred, _) in ranking.iter().take(take) {
            labels[i] = pred;
        }
        let mut diag = BTreeMap::new();
        diag.insert("disagreements".into(), ranking.len() as f64);
        Ok(CorrectionResult::new(y, labels, 1, diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::{separable_boxes, TwoGaussians};

    #[test]
    fn agreement_is_identity() {
        let d = separable_boxes(50, 2);
        let r = ObncParams::default().correct(d.features(), d.labels(), 0).unwrap();
        assert_eq!(&r.corrected, d.labels());
    }

    #[test]
    fn full_fraction_adopts_all_ensemble_predictions() {
        let d = TwoGaussians::new(200, 1).generate();
        let p = ObncParams::default();
        let ranking = obnc_ranking(d.features(), d.labels(), &p, 5).unwrap();
        let r = p.correct(d.features(), d.labels(), 5).unwrap();
        assert_eq!(r.changed(), ranking.len());
        for (i, pred, _) in ranking {
            assert_eq!(r.corrected.get(i), pred);
        }
    }

    #[test]
    fn ranking_is_sorted_by_absolute_margin() {
        for seed in 0..10 {
            let d = TwoGaussians { separation: 0.5, ..TwoGaussians::new(150, seed) }.generate();
            let ranking = obnc_ranking(d.features(), d.labels(), &ObncParams::default(), seed).unwrap();
            for w in ranking.windows(2) {
                assert!(w[0].2.abs() >= w[1].2.abs());
            }
        }
    }

    #[test]
    fn partial_fraction_rounds_up() {
        let d = TwoGaussians { separation: 0.3, ..TwoGaussians::new(120, 4) }.generate();
        let p = ObncParams { relabel_fraction: 0.1, ..Default::default() };
        let n_dis = obnc_ranking(d.features(), d.labels(), &p, 2).unwrap().len();
        let r = p.correct(d.features(), d.labels(), 2).unwrap();
        assert_eq!(r.changed(), (0.1 * n_dis as f64).ceil() as usize);
    }
}
