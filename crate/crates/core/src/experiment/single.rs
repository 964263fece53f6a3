use serde::{Deserialize, Serialize};

use super::results::EvaluationRecord;
use crate::correction::Corrector;
use crate::dataset::{split, Dataset, LabelVector, Provenance};
use crate::error::Result;
use crate::learners::{logreg_fit, LogRegParams, TrainedModel};
use crate::metrics::{evaluate, reconstruction_score, MetricValue};
use crate::noise::{inject, NoiseSpec};

/// Which view of the labels a training or test set carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Original,
    Noisy,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub test_fraction: f64,
    pub learner: LogRegParams,
    pub threshold: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            test_fraction: 0.3,
            learner: LogRegParams::default(),
            threshold: 0.5,
        }
    }
}

/// Everything one cell needs. Train and test noise use `noise_train` and
/// `noise_test`, which share kind and rate but carry distinct seeds.
pub struct RunSpec<'a> {
    pub dataset: &'a Dataset,
    pub noise_train: NoiseSpec,
    pub noise_test: NoiseSpec,
    pub corrector: &'a dyn Corrector,
    /// Corrects the noisy test set; the evaluated method when `None`.
    pub test_corrector: Option<&'a dyn Corrector>,
    pub correction_seed: u64,
    pub test_correction_seed: u64,
    pub split_seed: u64,
    /// Replicate id written to every record.
    pub seed: u64,
    pub settings: RunSettings,
}

/// Runs one cell and returns its 37 records: the training-set
/// reconstruction score, then six metrics for each of
/// M_n and M_c on the noisy test set, M_o, M_n and M_c on the original test
/// set, and M_c on the corrected test set.
pub fn run_single(spec: &RunSpec<'_>) -> Result<Vec<EvaluationRecord>> {
    let parts = split(spec.dataset, spec.settings.test_fraction, spec.split_seed)?;
    let (train, test) = (parts.train, parts.test);

    let noisy_train = inject(train.labels(), train.group(), &spec.noise_train)?.labels;
    let noisy_test = inject(test.labels(), test.group(), &spec.noise_test)?.labels;
    let d_n_train = train.with_labels(noisy_train, Provenance::Noisy(spec.noise_train))?;
    let d_n_test = test.with_labels(noisy_test, Provenance::Noisy(spec.noise_test))?;

    // Correctors see features and labels only.
    let fixed_train = spec
        .corrector
        .correct(d_n_train.features(), d_n_train.labels(), spec.correction_seed)?;
    let test_corrector = spec.test_corrector.unwrap_or(spec.corrector);
    let fixed_test = test_corrector.correct(
        d_n_test.features(),
        d_n_test.labels(),
        spec.test_correction_seed,
    )?;
    let d_c_train = train.with_labels(fixed_train.corrected, Provenance::Corrected(spec.corrector.label()))?;
    let d_c_test = test.with_labels(fixed_test.corrected, Provenance::Corrected(test_corrector.label()))?;

    let hp = &spec.settings.learner;
    let m_o = logreg_fit(&train, hp)?;
    let m_n = logreg_fit(&d_n_train, hp)?;
    let m_c = logreg_fit(&d_c_train, hp)?;

    let record = |train_source: DataSource, test_source: DataSource, m: MetricValue| EvaluationRecord {
        dataset: spec.dataset.name().to_owned(),
        method: spec.corrector.label(),
        noise_kind: spec.noise_train.kind,
        rate: spec.noise_train.rate,
        seed: spec.seed,
        train_source,
        test_source,
        metric: m.name,
        value: m.value,
        well_defined: m.well_defined,
    };

    let mut out = Vec::with_capacity(37);
    out.push(record(
        DataSource::Corrected,
        DataSource::Original,
        reconstruction_score(d_c_train.labels(), train.labels())?,
    ));
    let evaluations: [(&TrainedModel, DataSource, &Dataset, DataSource); 6] = [
        (&m_n, DataSource::Noisy, &d_n_test, DataSource::Noisy),
        (&m_c, DataSource::Corrected, &d_n_test, DataSource::Noisy),
        (&m_o, DataSource::Original, &test, DataSource::Original),
        (&m_n, DataSource::Noisy, &test, DataSource::Original),
        (&m_c, DataSource::Corrected, &test, DataSource::Original),
        (&m_c, DataSource::Corrected, &d_c_test, DataSource::Corrected),
    ];
    for (model, train_source, test_set, test_source) in evaluations {
        for m in score_on(model, test_set, spec.settings.threshold)? {
            out.push(record(train_source, test_source, m));
        }
    }
    Ok(out)
}

fn score_on(model: &TrainedModel, test: &Dataset, threshold: f64) -> Result<Vec<MetricValue>> {
    let scores = model.score(test.features());
    let labels: &LabelVector = test.labels();
    evaluate(&scores, threshold, labels, test.group())
}
