use ndarray::{ArrayView1, ArrayView2};

/// Axis-aligned binary tree grown greedily on Gini impurity.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionTree {
    Leaf {
        /// Fraction of class 1 among the training rows reaching the leaf.
        positive: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<DecisionTree>,
        right: Box<DecisionTree>,
    },
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl DecisionTree {
    /// Grows a tree on `rows` (indices into `x`, repeats allowed).
    pub fn fit(x: ArrayView2<'_, f64>, y: &[u8], rows: &[usize], max_depth: usize) -> Self {
        let pos = rows.iter().filter(|&&i| y[i] == 1).count();
        let leaf = DecisionTree::Leaf {
            positive: if rows.is_empty() { 0.5 } else { pos as f64 / rows.len() as f64 },
        };
        if max_depth == 0 || pos == 0 || pos == rows.len() {
            return leaf;
        }
        let n = rows.len();
        let parent = gini(pos, n) * n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = rows.to_vec();
        for f in 0..x.ncols() {
            order.sort_by(|&a, &b| x[[a, f]].total_cmp(&x[[b, f]]));
            let mut left_pos = 0;
            for k in 1..n {
                left_pos += usize::from(y[order[k - 1]] == 1);
                let (lo, hi) = (x[[order[k - 1], f]], x[[order[k], f]]);
                if lo == hi {
                    continue;
                }
                let cost = gini(left_pos, k) * k as f64 + gini(pos - left_pos, n - k) * (n - k) as f64;
                if cost < parent - 1e-12 && best.is_none_or(|b| cost < b.0) {
                    best = Some((cost, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return leaf;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[[i, feature]] <= threshold);
        DecisionTree::Split {
            feature,
            threshold,
            left: Box::new(DecisionTree::fit(x, y, &l, max_depth - 1)),
            right: Box::new(DecisionTree::fit(x, y, &r, max_depth - 1)),
        }
    }

    pub fn leaf_positive(&self, row: ArrayView1<'_, f64>) -> f64 {
        match self {
            DecisionTree::Leaf { positive } => *positive,
            DecisionTree::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.leaf_positive(row)
                } else {
                    right.leaf_positive(row)
                }
            }
        }
    }

    /// Majority class of the reached leaf; an even leaf predicts 1.
    pub fn predict_row(&self, row: ArrayView1<'_, f64>) -> u8 {
        u8::from(self.leaf_positive(row) >= 0.5)
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 0,
            DecisionTree::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}
