use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{check_fit_input, Scorer, Standardizer};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogRegParams {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1.0,
            epochs: 200,
            learning_rate: 0.1,
        }
    }
}

/// L2-regularized logistic regression trained by full-batch gradient descent
/// on standardized features. The step is halved whenever it would increase
/// the loss, so the recorded loss sequence never increases.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    standardizer: Standardizer,
    weights: Array1<f64>,
    bias: f64,
    params: LogRegParams,
    loss_history: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log-loss plus `l2 / (2n) * |w|^2` (bias unpenalized), and its
/// gradient with respect to `w` and the bias.
pub fn loss_and_gradient(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    l2: f64,
    w: ArrayView1<'_, f64>,
    b: f64,
) -> (f64, Array1<f64>, f64) {
    let n = x.nrows() as f64;
    let z = x.dot(&w) + b;
    let mut loss = 0.0;
    let mut resid = Array1::zeros(x.nrows());
    for (i, &zi) in z.iter().enumerate() {
        let yi = f64::from(y[i]);
        // -[y ln p + (1-y) ln(1-p)] = softplus(z) - y z
        loss += softplus(zi) - yi * zi;
        resid[i] = sigmoid(zi) - yi;
    }
    loss = loss / n + l2 / (2.0 * n) * w.dot(&w);
    let grad_w = x.t().dot(&resid) / n + &w * (l2 / n);
    let grad_b = resid.sum() / n;
    (loss, grad_w, grad_b)
}

impl LogisticRegression {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[u8], params: &LogRegParams) -> Result<Self> {
        check_fit_input(x, y, "logistic regression")?;
        let standardizer = Standardizer::fit(x);
        let z = standardizer.transform(x);
        let mut w = Array1::zeros(x.ncols());
        let mut b = 0.0;
        let mut rate = params.learning_rate;
        let (mut loss, mut gw, mut gb) = loss_and_gradient(z.view(), y, params.l2, w.view(), b);
        let mut history = vec![loss];
        for _ in 0..params.epochs {
            let mut accepted = false;
            while rate > 1e-12 {
                let w_new = &w - &(&gw * rate);
                let b_new = b - rate * gb;
                let (l, g, h) = loss_and_gradient(z.view(), y, params.l2, w_new.view(), b_new);
                if l <= loss {
                    w = w_new;
                    b = b_new;
                    loss = l;
                    gw = g;
                    gb = h;
                    accepted = true;
                    break;
                }
                rate /= 2.0;
            }
            if !accepted {
                break;
            }
            history.push(loss);
        }
        Ok(LogisticRegression {
            standardizer,
            weights: w,
            bias: b,
            params: *params,
            loss_history: history,
        })
    }

    pub fn params(&self) -> LogRegParams {
        self.params
    }

    /// Weights in standardized feature space.
    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Training loss before the first step and after every accepted step.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }
}

impl Scorer for LogisticRegression {
    fn score_row(&self, row: ArrayView1<'_, f64>) -> f64 {
        let z = self.standardizer.transform_row(row);
        sigmoid(z.dot(&self.weights) + self.bias)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_line_is_fitted_exactly() {
        let x = array![[-3.0], [-2.0], [-1.0], [-0.5], [0.5], [1.0], [2.0], [3.0]];
        let y = [0, 0, 0, 0, 1, 1, 1, 1];
        let m = LogisticRegression::fit(x.view(), &y, &LogRegParams::default()).unwrap();
        let acc = m
            .score(x.view())
            .iter()
            .zip(&y)
            .filter(|(s, &t)| u8::from(**s >= 0.5) == t)
            .count();
        assert_eq!(acc, 8);
    }

    #[test]
    fn constant_features_give_half() {
        let x = Array2::from_elem((10, 3), 2.0);
        let y = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let m = LogisticRegression::fit(x.view(), &y, &LogRegParams::default()).unwrap();
        for s in m.score(x.view()) {
            assert!((s - 0.5).abs() < 0.05);
        }
    }

    #[test]
    fn single_class_is_degenerate() {
        let x = array![[1.0], [2.0]];
        let err = LogisticRegression::fit(x.view(), &[1, 1], &LogRegParams::default());
        assert!(matches!(err, Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = Array2::from_shape_fn((5, 3), |_| rng.random_range(-2.0..2.0));
            let y: Vec<u8> = (0..5).map(|_| rng.random_range(0..2)).collect();
            let w = Array1::from_shape_fn(3, |_| rng.random_range(-1.0..1.0));
            let b = rng.random_range(-1.0..1.0);
            let l2 = 0.7;
            let (_, gw, gb) = loss_and_gradient(x.view(), &y, l2, w.view(), b);
            let h = 1e-6;
            for j in 0..3 {
                let mut up = w.clone();
                up[j] += h;
                let mut dn = w.clone();
                dn[j] -= h;
                let fd = (loss_and_gradient(x.view(), &y, l2, up.view(), b).0
                    - loss_and_gradient(x.view(), &y, l2, dn.view(), b).0)
                    / (2.0 * h);
                let rel = (fd - gw[j]).abs() / gw[j].abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-5, "component {j}: {fd} vs {}", gw[j]);
            }
            let fd = (loss_and_gradient(x.view(), &y, l2, w.view(), b + h).0
                - loss_and_gradient(x.view(), &y, l2, w.view(), b - h).0)
                / (2.0 * h);
            assert!((fd - gb).abs() / gb.abs().max(fd.abs()).max(1e-8) < 1e-5);
        }
    }

    #[test]
    fn loss_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = Array2::from_shape_fn((40, 4), |_| rng.random_range(-3.0..3.0));
            let y: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
            let m = LogisticRegression::fit(x.view(), &y, &LogRegParams::default()).unwrap();
            for pair in m.loss_history().windows(2) {
                assert!(pair[1] <= pair[0]);
            }
        }
    }

    #[test]
    fn scores_stay_in_unit_interval_far_outside_training_range() {
        let x = array![[-1.0, 0.0], [1.0, 0.0], [-2.0, 1.0], [2.0, 1.0]];
        let m = LogisticRegression::fit(x.view(), &[0, 1, 0, 1], &LogRegParams::default()).unwrap();
        for row in [array![1e12, -1e12], array![-1e300, 1e300]] {
            let s = m.score_row(row.view());
            assert!((0.0..=1.0).contains(&s));
        }
    }
}
