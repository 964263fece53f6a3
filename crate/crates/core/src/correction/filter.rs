use ndarray::ArrayView2;

use super::{complement, stratified_folds, FitOrConstant};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterOutcome {
    pub clean: Vec<usize>,
    pub noisy: Vec<usize>,
}

/// Classification filter: every instance is predicted by a logistic model
/// fitted on the other folds, and misclassified instances are flagged noisy.
pub fn classification_filter(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    folds: usize,
    seed: u64,
) -> Result<FilterOutcome> {
    let n = y.len();
    let folds = stratified_folds(y, folds, seed)?;
    let mut noisy_flag = vec![false; n];
    for fold in &folds {
        let model = FitOrConstant::fit(x, y, &complement(n, fold))?;
        for &i in fold {
            noisy_flag[i] = u8::from(model.score_row(x.row(i)) >= 0.5) != y[i];
        }
    }
    let (noisy, clean) = (0..n).partition(|&i| noisy_flag[i]);
    Ok(FilterOutcome { clean, noisy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::{constant_features, separable_boxes};

    #[test]
    fn learnable_data_has_no_noise() {
        let d = separable_boxes(80, 5);
        let out = classification_filter(d.features(), d.labels().as_slice(), 5, 0).unwrap();
        assert!(out.noisy.is_empty());
        assert_eq!(out.clean.len(), 80);
    }

    #[test]
    fn constant_predictions_flag_about_half() {
        let d = constant_features(100, 2, 1);
        let out = classification_filter(d.features(), d.labels().as_slice(), 5, 0).unwrap();
        assert!((40..=60).contains(&out.noisy.len()), "{}", out.noisy.len());
    }

    #[test]
    fn planted_mislabel_is_flagged_across_seeds() {
        let mut hits = 0;
        for seed in 0..10 {
            let d = separable_boxes(60, seed);
            let mut y = d.labels().as_slice().to_vec();
            y[0] = 1 - y[0];
            let out = classification_filter(d.features(), &y, 5, seed).unwrap();
            hits += usize::from(out.noisy.contains(&0));
        }
        assert!(hits >= 9, "{hits}/10");
    }
}
