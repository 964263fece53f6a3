use std::collections::BTreeMap;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{CorrectionResult, Corrector};
use crate::dataset::LabelVector;
use crate::error::{Error, Result};
use crate::learners::{kmeans, seeded_kmeans, CoTrainParams, CoTrained, Scorer, Standardizer};

/// Hybrid correction: k-means separates high-confidence instances (label
/// matches the cluster majority) from low-confidence ones, then two models
/// trained on the high-confidence set relabel low-confidence instances
/// wherever they agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HlncParams {
    pub k: usize,
    pub max_iterations: usize,
    pub cotrain: CoTrainParams,
}

impl Default for HlncParams {
    fn default() -> Self {
        HlncParams {
            k: 2,
            max_iterations: 10,
            cotrain: CoTrainParams::default(),
        }
    }
}

impl HlncParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::validation(format!("HLNC needs k >= 2, got {}", self.k)));
        }
        Ok(())
    }
}

/// The two models that vote on low-confidence instances.
pub trait HlncVoters: Sync {
    /// Proposed labels for each row in `low`, one vector per model.
    /// `seeds[l]` holds the rows treated as known members of label `l`.
    fn votes(
        &self,
        z: ArrayView2<'_, f64>,
        labels: &[u8],
        seeds: &[Vec<usize>; 2],
        low: &[usize],
        seed: u64,
    ) -> Result<[Vec<u8>; 2]>;
}

/// Seeded k-means and co-training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelVoters {
    pub cotrain: CoTrainParams,
}

impl HlncVoters for ModelVoters {
    fn votes(
        &self,
        z: ArrayView2<'_, f64>,
        labels: &[u8],
        seeds: &[Vec<usize>; 2],
        low: &[usize],
        seed: u64,
    ) -> Result<[Vec<u8>; 2]> {
        let clustering = seeded_kmeans(z, seeds)?;
        let ssk: Vec<u8> = low.iter().map(|&i| clustering.assignments[i] as u8).collect();

        let mut labeled: Vec<usize> = seeds.concat();
        labeled.sort_unstable();
        let ys: Vec<u8> = labeled.iter().map(|&i| labels[i]).collect();
        let unlabeled: Vec<usize> = low
            .iter()
            .copied()
            .filter(|i| labeled.binary_search(i).is_err())
            .collect();
        let params = CoTrainParams {
            view_seed: seed,
            ..self.cotrain
        };
        let ct = CoTrained::fit(
            z.select(Axis(0), &labeled).view(),
            &ys,
            z.select(Axis(0), &unlabeled).view(),
            &params,
        )?;
        let co: Vec<u8> = low
            .iter()
            .map(|&i| u8::from(ct.score_row(z.row(i)) >= 0.5))
            .collect();
        Ok([ssk, co])
    }
}

impl HlncParams {
    pub fn correct_with(
        &self,
        x: ArrayView2<'_, f64>,
        y: &LabelVector,
        seed: u64,
        voters: &dyn HlncVoters,
    ) -> Result<CorrectionResult> {
        self.validate()?;
        let n = y.len();
        if self.k > n {
            return Err(Error::validation(format!("HLNC k = {} exceeds {n} instances", self.k)));
        }
        let z = Standardizer::fit(x).transform(x);
        let mut labels = y.as_slice().to_vec();
        let clustering = kmeans(z.view(), self.k, seed)?;
        let mut counts = vec![[0usize; 2]; self.k];
        for i in 0..n {
            counts[clustering.assignments[i]][labels[i] as usize] += 1;
        }
        let cluster_label: Vec<u8> = counts.iter().map(|c| u8::from(c[1] > c[0])).collect();
        let mut high: Vec<bool> = (0..n)
            .map(|i| labels[i] == cluster_label[clustering.assignments[i]])
            .collect();
        let initial_low = high.iter().filter(|&&h| !h).count();

        let mut iterations = 0;
        let mut promoted_total = 0usize;
        while iterations < self.max_iterations {
            let low: Vec<usize> = (0..n).filter(|&i| !high[i]).collect();
            if low.is_empty() {
                break;
            }
            let mut seeds: [Vec<usize>; 2] = [0u8, 1].map(|l| {
                (0..n).filter(|&i| high[i] && labels[i] == l).collect()
            });
            for l in 0..2u8 {
                if seeds[l as usize].is_empty() {
                    seeds[l as usize] = (0..n).filter(|&i| labels[i] == l).collect();
                }
                if seeds[l as usize].is_empty() {
                    return Err(Error::Correction(format!(
                        "HLNC: no instance carries label {l}"
                    )));
                }
            }
            iterations += 1;
            let [a, b] = voters.votes(z.view(), &labels, &seeds, &low, seed.wrapping_add(iterations as u64))?;
            let mut promoted = 0;
            for (k, &i) in low.iter().enumerate() {
                if a[k] == b[k] {
                    labels[i] = a[k];
                    high[i] = true;
                    promoted += 1;
                }
            }
            promoted_total += promoted;
            if promoted == 0 {
                break;
            }
        }
        let mut diag = BTreeMap::new();
        diag.insert("initial_low_confidence".into(), initial_low as f64);
        diag.insert("promoted".into(), promoted_total as f64);
        Ok(CorrectionResult::new(y, labels, iterations, diag))
    }
}

impl Corrector for HlncParams {
    fn label(&self) -> String {
        "HLNC".into()
    }

    fn correct(&self, x: ArrayView2<'_, f64>, y: &LabelVector, seed: u64) -> Result<CorrectionResult> {
        self.correct_with(x, y, seed, &ModelVoters { cotrain: self.cotrain })
    }
}
