use ndarray::{ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DecisionTree, Scorer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaggingParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for BaggingParams {
    fn default() -> Self {
        BaggingParams {
            n_trees: 11,
            max_depth: 4,
            seed: 0,
        }
    }
}

/// Bootstrap-aggregated decision trees with one vote per tree.
#[derive(Debug, Clone)]
pub struct BaggedTrees {
    trees: Vec<DecisionTree>,
    params: BaggingParams,
}

impl BaggedTrees {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[u8], params: &BaggingParams) -> Result<Self> {
        if params.n_trees.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "n_trees must be odd, got {}",
                params.n_trees
            )));
        }
        if x.nrows() != y.len() || y.is_empty() {
            return Err(Error::validation(format!(
                "bagging: {} rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        let n = y.len();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let trees = (0..params.n_trees)
            .map(|_| {
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                DecisionTree::fit(x, y, &sample, params.max_depth)
            })
            .collect();
        Ok(BaggedTrees {
            trees,
            params: *params,
        })
    }

    pub fn params(&self) -> BaggingParams {
        self.params
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// `(votes for 1, votes for 0)`; always sums to `n_trees`.
    pub fn votes(&self, row: ArrayView1<'_, f64>) -> (usize, usize) {
        let ones = self.trees.iter().filter(|t| t.predict_row(row) == 1).count();
        (ones, self.trees.len() - ones)
    }
}

impl Scorer for BaggedTrees {
    fn score_row(&self, row: ArrayView1<'_, f64>) -> f64 {
        self.votes(row).0 as f64 / self.trees.len() as f64
    }
}
