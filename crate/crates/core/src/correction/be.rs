use std::collections::BTreeMap;

use ndarray::{ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{degenerate_to_correction, CorrectionResult, Corrector};
use crate::dataset::LabelVector;
use crate::error::Result;
use crate::learners::{GaussianNb, Scorer, DEFAULT_SMOOTHING};

/// Bayesian-entropy correction: an ensemble of naive Bayes models fitted on
/// class-stratified bootstrap samples votes on every label, and confident
/// disagreements are flipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeParams {
    pub n_classifiers: usize,
    pub max_rounds: usize,
}

impl Default for BeParams {
    fn default() -> Self {
        BeParams {
            n_classifiers: 10,
            max_rounds: 10,
        }
    }
}

fn entropy(p: f64) -> f64 {
    let h = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

impl Corrector for BeParams {
    fn label(&self) -> String {
        "BE".into()
    }

    fn correct(&self, x: ArrayView2<'_, f64>, y: &LabelVector, seed: u64) -> Result<CorrectionResult> {
        let n = y.len();
        let mut labels = y.as_slice().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rounds = 0;
        let mut flips = 0usize;
        while rounds < self.max_rounds {
            let classes: [Vec<usize>; 2] =
                [0u8, 1].map(|c| (0..n).filter(|&i| labels[i] == c).collect());
            if classes.iter().any(Vec::is_empty) {
                break;
            }
            rounds += 1;
            let mut avg = vec![0.0; n];
            for _ in 0..self.n_classifiers.max(1) {
                let sample: Vec<usize> = classes
                    .iter()
                    .flat_map(|members| {
                        (0..members.len())
                            .map(|_| members[rng.random_range(0..members.len())])
                            .collect::<Vec<_>>()
                    })
                    .collect();
                let xs = x.select(Axis(0), &sample);
                let ys: Vec<u8> = sample.iter().map(|&i| labels[i]).collect();
                let nb = GaussianNb::fit(xs.view(), &ys, DEFAULT_SMOOTHING)
                    .map_err(degenerate_to_correction)?;
                for (a, s) in avg.iter_mut().zip(nb.score(x)) {
                    *a += s;
                }
            }
            let k = self.n_classifiers.max(1) as f64;
            avg.iter_mut().for_each(|a| *a /= k);
            // An exact 0.5 posterior keeps the observed label.
            let disagree: Vec<usize> = (0..n)
                .filter(|&i| avg[i] != 0.5 && u8::from(avg[i] > 0.5) != labels[i])
                .collect();
            if disagree.is_empty() {
                break;
            }
            let threshold =
                disagree.iter().map(|&i| entropy(avg[i])).sum::<f64>() / disagree.len() as f64;
            let mut flipped = 0;
            for &i in &disagree {
                if entropy(avg[i]) <= threshold {
                    labels[i] = 1 - labels[i];
                    flipped += 1;
                }
            }
            flips += flipped;
            if flipped == 0 {
                break;
            }
        }
        let mut diag = BTreeMap::new();
        diag.insert("flips".into(), flips as f64);
        Ok(CorrectionResult::new(y, labels, rounds, diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::separable_boxes;

    #[test]
    fn zero_rounds_is_identity() {
        let d = separable_boxes(40, 1);
        let p = BeParams { max_rounds: 0, ..Default::default() };
        let r = p.correct(d.features(), d.labels(), 0).unwrap();
        assert_eq!(&r.corrected, d.labels());
        assert!(r.changed_mask.iter().all(|&c| !c));
        assert_eq!(r.iterations_used, 0);
    }

    #[test]
    fn planted_error_is_flipped_in_round_one() {
        let d = separable_boxes(60, 2);
        // The point deepest inside the positive box, labeled negative.
        let target = (0..d.len())
            .filter(|&i| d.labels().get(i) == 1)
            .max_by(|&a, &b| {
                let s = |i: usize| d.features()[[i, 0]] + d.features()[[i, 1]];
                s(a).total_cmp(&s(b))
            })
            .unwrap();
        let mut y = d.labels().as_slice().to_vec();
        y[target] = 0;
        let y = LabelVector::new(y).unwrap();
        let p = BeParams { max_rounds: 1, ..Default::default() };
        let r = p.correct(d.features(), &y, 4).unwrap();
        assert!(r.changed_mask[target]);
    }

    #[test]
    fn clean_separable_data_barely_changes() {
        for seed in 0..10 {
            let d = separable_boxes(200, seed);
            let r = BeParams::default().correct(d.features(), d.labels(), seed).unwrap();
            assert!(r.changed() <= 2, "seed {seed}: {} changed", r.changed());
        }
    }

    #[test]
    fn entropy_bounds() {
        assert_eq!(entropy(0.5), 1.0);
        assert_eq!(entropy(1.0), 0.0);
    }
}
