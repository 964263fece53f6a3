use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{CorrectionResult, Corrector};
use crate::dataset::LabelVector;
use crate::error::{Error, Result};
use crate::learners::{kmeans, Standardizer};

/// Cluster-based correction: k-means at several scales; each cluster lends
/// its members a weight per label, and instances take the heaviest label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcParams {
    pub k_values: Vec<usize>,
}

impl Default for CcParams {
    fn default() -> Self {
        CcParams {
            k_values: vec![2, 3, 5, 8, 13],
        }
    }
}

impl CcParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() {
            return Err(Error::validation("CC needs at least one k"));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k < 2) {
            return Err(Error::validation(format!("CC k values must be >= 2, got {k}")));
        }
        Ok(())
    }
}

/// Weight a cluster gives label `l` on each of its members: the label's
/// share of the cluster times the cluster's share of the data, which
/// reduces to `n_l(c) / N`.
pub fn cluster_weight(label_count: usize, cluster_size: usize, n: usize) -> f64 {
    if cluster_size == 0 {
        return 0.0;
    }
    (label_count as f64 / cluster_size as f64) * (cluster_size as f64 / n as f64)
}

impl Corrector for CcParams {
    fn label(&self) -> String {
        "CC".into()
    }

    fn correct(&self, x: ArrayView2<'_, f64>, y: &LabelVector, seed: u64) -> Result<CorrectionResult> {
        let n = y.len();
        if let Some(k) = self.k_values.iter().find(|&&k| k > n) {
            return Err(Error::validation(format!("CC k = {k} exceeds {n} instances")));
        }
        let z = Standardizer::fit(x).transform(x);
        let obs = y.as_slice();
        let mut weight = vec![[0.0f64; 2]; n];
        for (run, &k) in self.k_values.iter().enumerate() {
            let c = kmeans(z.view(), k, seed.wrapping_add(run as u64))?;
            let mut counts = vec![[0usize; 2]; k];
            for i in 0..n {
                counts[c.assignments[i]][obs[i] as usize] += 1;
            }
            for i in 0..n {
                let cell = counts[c.assignments[i]];
                let size = cell[0] + cell[1];
                for l in 0..2 {
                    weight[i][l] += cluster_weight(cell[l], size, n);
                }
            }
        }
        let corrected = (0..n)
            .map(|i| {
                let [w0, w1] = weight[i];
                if w1 > w0 {
                    1
                } else if w0 > w1 {
                    0
                } else {
                    obs[i]
                }
            })
            .collect();
        let mut diag = BTreeMap::new();
        diag.insert("clusterings".into(), self.k_values.len() as f64);
        Ok(CorrectionResult::new(y, corrected, self.k_values.len(), diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::TwoGaussians;
    use crate::metrics::reconstruction_score;
    use crate::noise::{inject_balanced_bias, NoiseKind, NoiseSpec};
    use ndarray::array;

    #[test]
    fn weight_formula() {
        assert_eq!(cluster_weight(3, 4, 8), 3.0 / 8.0);
        assert_eq!(cluster_weight(0, 0, 8), 0.0);
    }

    #[test]
    fn pure_clusters_keep_their_label() {
        let x = array![[0.0], [0.1], [0.2], [10.0], [10.1], [10.2]];
        let y = LabelVector::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let p = CcParams { k_values: vec![2] };
        let r = p.correct(x.view(), &y, 0).unwrap();
        assert_eq!(r.corrected, y);
    }

    #[test]
    fn tied_weights_keep_observed_label() {
        let x = array![[0.0], [0.1], [10.0], [10.1]];
        let y = LabelVector::new(vec![0, 1, 0, 1]).unwrap();
        let r = CcParams { k_values: vec![2] }.correct(x.view(), &y, 0).unwrap();
        assert_eq!(r.corrected, y);
    }

    #[test]
    fn planted_balanced_noise_is_mostly_restored() {
        let d = TwoGaussians { separation: 2.0, ..TwoGaussians::new(600, 3) }.generate();
        let spec = NoiseSpec::new(NoiseKind::BalancedBias, 0.2, 5).unwrap();
        let noisy = inject_balanced_bias(d.labels(), d.group(), &spec).unwrap();
        let x = d.features();
        // Informative features only, as in the two-blob construction.
        let x = x.slice(ndarray::s![.., 0..2]);
        let p = CcParams { k_values: vec![2, 3, 4, 5] };
        let r = p.correct(x, &noisy.labels, 1).unwrap();
        let restored = (0..d.len())
            .filter(|&i| noisy.flipped[i] && r.corrected.get(i) == d.labels().get(i))
            .count();
        assert!(2 * restored > noisy.flip_count());
        let before = reconstruction_score(&noisy.labels, d.labels()).unwrap().value;
        let after = reconstruction_score(&r.corrected, d.labels()).unwrap().value;
        assert!(after > before);
    }
}
