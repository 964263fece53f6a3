use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use super::{check_fit_input, Scorer};
use crate::error::{Error, Result};

pub const DEFAULT_SMOOTHING: f64 = 1e-9;

/// Gaussian naive Bayes for two classes.
///
/// Per-class variances get `smoothing * max(1, largest feature variance)`
/// added, so constant features never divide by zero.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    log_prior: [f64; 2],
    means: Array2<f64>,
    vars: Array2<f64>,
    smoothing: f64,
}

impl GaussianNb {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[u8], smoothing: f64) -> Result<Self> {
        if !(smoothing > 0.0) {
            return Err(Error::validation(format!(
                "naive Bayes smoothing must be positive, got {smoothing}"
            )));
        }
        check_fit_input(x, y, "naive Bayes")?;
        let f = x.ncols();
        let max_var = x
            .var_axis(Axis(0), 0.0)
            .iter()
            .copied()
            .fold(0.0, f64::max);
        let eps = smoothing * max_var.max(1.0);
        let mut means = Array2::zeros((2, f));
        let mut vars = Array2::zeros((2, f));
        let mut log_prior = [0.0; 2];
        for c in 0..2u8 {
            let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
            let xc = x.select(Axis(0), &rows);
            means
                .row_mut(c as usize)
                .assign(&xc.mean_axis(Axis(0)).expect("class is non-empty"));
            vars.row_mut(c as usize)
                .assign(&(xc.var_axis(Axis(0), 0.0) + eps));
            log_prior[c as usize] = (rows.len() as f64 / y.len() as f64).ln();
        }
        Ok(GaussianNb {
            log_prior,
            means,
            vars,
            smoothing,
        })
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    fn joint_log_likelihood(&self, row: ArrayView1<'_, f64>, c: usize) -> f64 {
        let mut ll = self.log_prior[c];
        for ((&v, &m), &s2) in row.iter().zip(self.means.row(c)).zip(self.vars.row(c)) {
            ll -= 0.5 * ((2.0 * std::f64::consts::PI * s2).ln() + (v - m) * (v - m) / s2);
        }
        ll
    }
}

impl Scorer for GaussianNb {
    fn score_row(&self, row: ArrayView1<'_, f64>) -> f64 {
        let l0 = self.joint_log_likelihood(row, 0);
        let l1 = self.joint_log_likelihood(row, 1);
        // P(1|x) = 1 / (1 + exp(l0 - l1))
        let d = l0 - l1;
        if d.is_nan() {
            return 0.5;
        }
        if d > 0.0 {
            let e = (-d).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + d.exp())
        }
    }
}
