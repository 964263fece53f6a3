use ndarray::{concatenate, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GaussianNb, Scorer, DEFAULT_SMOOTHING};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoTrainParams {
    pub view_seed: u64,
    pub rounds: usize,
    /// Instances each view labels per round.
    pub growth: usize,
    pub smoothing: f64,
}

impl Default for CoTrainParams {
    fn default() -> Self {
        CoTrainParams {
            view_seed: 0,
            rounds: 10,
            growth: 2,
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

/// Two naive Bayes models on disjoint feature views, grown by labeling
/// unlabeled rows for each other.
#[derive(Debug, Clone)]
pub struct CoTrained {
    views: [Vec<usize>; 2],
    models: [GaussianNb; 2],
    params: CoTrainParams,
    /// Training-pool sizes of both views before round 1 and after each round.
    pool_history: Vec<[usize; 2]>,
}

impl CoTrained {
    pub fn fit(
        x: ArrayView2<'_, f64>,
        y: &[u8],
        unlabeled: ArrayView2<'_, f64>,
        params: &CoTrainParams,
    ) -> Result<Self> {
        let f = x.ncols();
        if f < 2 {
            return Err(Error::validation(format!(
                "co-training needs at least 2 features for two views, got {f}"
            )));
        }
        if unlabeled.ncols() != f {
            return Err(Error::validation(format!(
                "unlabeled rows have {} features, labeled rows {f}",
                unlabeled.ncols()
            )));
        }
        let mut cols: Vec<usize> = (0..f).collect();
        cols.shuffle(&mut ChaCha8Rng::seed_from_u64(params.view_seed));
        let (a, b) = cols.split_at(f / 2);
        let mut views = [a.to_vec(), b.to_vec()];
        views[0].sort_unstable();
        views[1].sort_unstable();

        let all = concatenate(Axis(0), &[x, unlabeled]).expect("same width");
        let view_data: [Array2<f64>; 2] = [
            all.select(Axis(1), &views[0]),
            all.select(Axis(1), &views[1]),
        ];
        let n_lab = x.nrows();
        let mut labels: Vec<u8> = y.to_vec();
        labels.resize(all.nrows(), 0);
        let mut pools: [Vec<usize>; 2] = [(0..n_lab).collect(), (0..n_lab).collect()];
        let mut remaining: Vec<usize> = (n_lab..all.nrows()).collect();
        let mut history = vec![[n_lab, n_lab]];

        let fit_view = |v: usize, pool: &[usize], labels: &[u8]| {
            let xs = view_data[v].select(Axis(0), pool);
            let ys: Vec<u8> = pool.iter().map(|&i| labels[i]).collect();
            GaussianNb::fit(xs.view(), &ys, params.smoothing)
        };

        for _ in 0..params.rounds {
            if remaining.is_empty() {
                break;
            }
            let models = [fit_view(0, &pools[0], &labels)?, fit_view(1, &pools[1], &labels)?];
            for v in 0..2 {
                let mut ranked: Vec<(f64, usize, u8)> = remaining
                    .iter()
                    .map(|&i| {
                        let p = models[v].score_row(view_data[v].row(i));
                        (p.max(1.0 - p), i, u8::from(p >= 0.5))
                    })
                    .collect();
                ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                for &(_, i, label) in ranked.iter().take(params.growth) {
                    labels[i] = label;
                    pools[1 - v].push(i);
                    remaining.retain(|&r| r != i);
                }
            }
            history.push([pools[0].len(), pools[1].len()]);
        }
        let models = [fit_view(0, &pools[0], &labels)?, fit_view(1, &pools[1], &labels)?];
        Ok(CoTrained {
            views,
            models,
            params: *params,
            pool_history: history,
        })
    }

    pub fn params(&self) -> CoTrainParams {
        self.params
    }

    pub fn views(&self) -> &[Vec<usize>; 2] {
        &self.views
    }

    pub fn pool_history(&self) -> &[[usize; 2]] {
        &self.pool_history
    }

    /// Posterior of class 1 from each view.
    pub fn view_scores(&self, row: ArrayView1<'_, f64>) -> [f64; 2] {
        [0, 1].map(|v| {
            let sub: Vec<f64> = self.views[v].iter().map(|&j| row[j]).collect();
            self.models[v].score_row(ArrayView1::from(&sub))
        })
    }
}

impl Scorer for CoTrained {
    fn score_row(&self, row: ArrayView1<'_, f64>) -> f64 {
        let [a, b] = self.view_scores(row);
        (a + b) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::TwoGaussians;
    use ndarray::{array, Axis};

    #[test]
    fn zero_rounds_averages_two_view_models() {
        let d = TwoGaussians::new(200, 4).generate();
        let x = d.features();
        let y = d.labels().as_slice();
        let p = CoTrainParams { rounds: 0, view_seed: 3, ..Default::default() };
        let m = CoTrained::fit(x, y, x.slice(ndarray::s![0..0, ..]), &p).unwrap();
        let [va, vb] = m.views().clone();
        let nb_a = GaussianNb::fit(x.select(Axis(1), &va).view(), y, p.smoothing).unwrap();
        let nb_b = GaussianNb::fit(x.select(Axis(1), &vb).view(), y, p.smoothing).unwrap();
        for i in 0..20 {
            let expected = (nb_a.score_row(x.select(Axis(1), &va).row(i))
                + nb_b.score_row(x.select(Axis(1), &vb).row(i)))
                / 2.0;
            assert_eq!(m.score_row(x.row(i)), expected);
        }
    }

    #[test]
    fn duplicated_views_on_separable_data() {
        let x = array![[0.0, 0.0], [0.5, 0.5], [1.0, 1.0], [9.0, 9.0], [9.5, 9.5], [10.0, 10.0]];
        let u = array![[0.2, 0.2], [9.8, 9.8], [0.7, 0.7], [9.1, 9.1]];
        let y = [0, 0, 0, 1, 1, 1];
        let m = CoTrained::fit(x.view(), &y, u.view(), &CoTrainParams::default()).unwrap();
        let pred: Vec<u8> = m.score(x.view()).iter().map(|&s| u8::from(s >= 0.5)).collect();
        assert_eq!(pred, y);
    }

    #[test]
    fn pools_grow_by_at_most_growth_per_round() {
        let d = TwoGaussians::new(300, 9).generate();
        let x = d.features();
        let (lab, unl) = x.view().split_at(Axis(0), 60);
        let p = CoTrainParams { growth: 3, rounds: 50, ..Default::default() };
        let m = CoTrained::fit(lab, &d.labels().as_slice()[..60], unl, &p).unwrap();
        let h = m.pool_history();
        let mut total = 0;
        for w in h.windows(2) {
            for v in 0..2 {
                let g = w[1][v] - w[0][v];
                assert!(g <= 3);
                total += g;
            }
        }
        assert!(total <= 240);
        assert!(h.len() > 1);
    }

    #[test]
    fn single_feature_is_rejected() {
        let x = array![[0.0], [1.0]];
        assert!(CoTrained::fit(x.view(), &[0, 1], x.view(), &CoTrainParams::default()).is_err());
    }
}
