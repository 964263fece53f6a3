//! From-scratch learners used by the correction methods and the evaluation
//! pipeline. Fits take a feature matrix plus labels; the `*_fit` helpers
//! taking a [`Dataset`] wrap them into a [`TrainedModel`].

mod bagging;
mod cotrain;
mod kmeans;
mod logistic;
mod naive_bayes;
mod tree;

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

pub use bagging::{BaggedTrees, BaggingParams};
pub use cotrain::{CoTrainParams, CoTrained};
pub use kmeans::{kmeans, kmeans_with_cap, seeded_kmeans, Clustering, MAX_ITERATIONS};
pub use logistic::{loss_and_gradient, LogRegParams, LogisticRegression};
pub use naive_bayes::{GaussianNb, DEFAULT_SMOOTHING};
pub use tree::DecisionTree;

use crate::dataset::{Dataset, LabelVector};
use crate::error::{Error, Result};

/// Something that maps one feature row to a probability of class 1.
pub trait Scorer {
    fn score_row(&self, row: ArrayView1<'_, f64>) -> f64;

    fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        x.outer_iter().map(|r| self.score_row(r)).collect()
    }
}

/// Learner kind plus the hyperparameters it was fitted with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerDescriptor {
    LogisticRegression(LogRegParams),
    NaiveBayes { smoothing: f64 },
    BaggedTrees(BaggingParams),
    CoTraining(CoTrainParams),
}

#[derive(Debug, Clone)]
pub enum Model {
    Logistic(LogisticRegression),
    NaiveBayes(GaussianNb),
    Bagged(BaggedTrees),
    CoTrained(CoTrained),
}

impl Scorer for Model {
    fn score_row(&self, row: ArrayView1<'_, f64>) -> f64 {
        match self {
            Model::Logistic(m) => m.score_row(row),
            Model::NaiveBayes(m) => m.score_row(row),
            Model::Bagged(m) => m.score_row(row),
            Model::CoTrained(m) => m.score_row(row),
        }
    }
}

/// A fitted classifier with a fixed decision threshold.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    model: Model,
    threshold: f64,
}

impl TrainedModel {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;

    pub fn new(model: Model) -> Self {
        TrainedModel {
            model,
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn descriptor(&self) -> LearnerDescriptor {
        match &self.model {
            Model::Logistic(m) => LearnerDescriptor::LogisticRegression(m.params()),
            Model::NaiveBayes(m) => LearnerDescriptor::NaiveBayes {
                smoothing: m.smoothing(),
            },
            Model::Bagged(m) => LearnerDescriptor::BaggedTrees(m.params()),
            Model::CoTrained(m) => LearnerDescriptor::CoTraining(m.params()),
        }
    }

    pub fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        self.model.score(x)
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> LabelVector {
        LabelVector::from_bools(self.score(x).into_iter().map(|s| s >= self.threshold))
    }
}

pub fn logreg_fit(train: &Dataset, hp: &LogRegParams) -> Result<TrainedModel> {
    let m = LogisticRegression::fit(train.features(), train.labels().as_slice(), hp)?;
    Ok(TrainedModel::new(Model::Logistic(m)))
}

pub fn naive_bayes_fit(train: &Dataset, smoothing: f64) -> Result<TrainedModel> {
    let m = GaussianNb::fit(train.features(), train.labels().as_slice(), smoothing)?;
    Ok(TrainedModel::new(Model::NaiveBayes(m)))
}

pub fn bagged_trees_fit(train: &Dataset, hp: &BaggingParams) -> Result<BaggedTrees> {
    BaggedTrees::fit(train.features(), train.labels().as_slice(), hp)
}

pub fn cotrain_fit(
    train: &Dataset,
    unlabeled: ArrayView2<'_, f64>,
    hp: &CoTrainParams,
) -> Result<TrainedModel> {
    let m = CoTrained::fit(train.features(), train.labels().as_slice(), unlabeled, hp)?;
    Ok(TrainedModel::new(Model::CoTrained(m)))
}

pub(crate) fn check_fit_input(x: ArrayView2<'_, f64>, y: &[u8], what: &str) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::validation(format!(
            "{what}: {} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::DegenerateFit(format!(
            "{what} needs both classes; got {pos} positive of {}",
            y.len()
        )));
    }
    Ok(())
}

/// Per-column mean and scale from training data. Columns with zero spread
/// get scale 1 so they map to 0 instead of dividing by zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let mean = x
            .mean_axis(Axis(0))
            .unwrap_or_else(|| Array1::zeros(x.ncols()));
        let scale = x
            .std_axis(Axis(0), 0.0)
            .mapv(|s| if s > 1e-12 { s } else { 1.0 });
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> ndarray::Array2<f64> {
        (&x - &self.mean) / &self.scale
    }

    pub fn transform_row(&self, row: ArrayView1<'_, f64>) -> Array1<f64> {
        (&row - &self.mean) / &self.scale
    }
}

pub(crate) fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn standardizer_handles_constant_columns() {
        let x = array![[1.0, 5.0], [3.0, 5.0]];
        let s = Standardizer::fit(x.view());
        let z = s.transform(x.view());
        assert_eq!(z, array![[-1.0, 0.0], [1.0, 0.0]]);
    }

    #[test]
    fn threshold_rule_is_inclusive() {
        let d = crate::dataset::synthetic::separable_boxes(40, 2);
        let m = logreg_fit(&d, &LogRegParams::default()).unwrap();
        let scores = m.score(d.features());
        let t = scores[0];
        let pred = m.clone().with_threshold(t).predict(d.features());
        assert_eq!(pred.get(0), 1);
        assert!(matches!(m.descriptor(), LearnerDescriptor::LogisticRegression(_)));
    }
}
