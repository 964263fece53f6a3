use std::collections::BTreeSet;
use std::sync::Mutex;

use ndarray::ArrayView2;
use proptest::prelude::*;

use lncfair::correction::{CorrectionResult, Corrector};
use lncfair::dataset::synthetic::TwoGaussians;
use lncfair::dataset::{load_local, split, summarize, LabelVector};
use lncfair::experiment::{
    emit_report, read_results, run_grid, run_single, DatasetEntry, ExperimentConfig, ReportKind, ResultLine,
    RunSettings, RunSpec,
};
use lncfair::metrics::MetricName;
use lncfair::noise::{inject, NoiseKind, NoiseSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn csv_roundtrip_preserves_summary(n in 8usize..80, seed in 0u64..1000) {
        let d = TwoGaussians::new(n, seed).generate();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        d.write_csv(&path).unwrap();
        let back = load_local(&path, &d.roundtrip_config()).unwrap().dataset;
        prop_assert_eq!(summarize(&back), summarize(&d));
        prop_assert_eq!(back.features(), d.features());
    }

    #[test]
    fn split_is_a_partition(n in 40usize..200, seed in 0u64..1000, frac in 0.2f64..0.6) {
        let d = TwoGaussians::new(n, seed).generate();
        let s = split(&d, frac, seed).unwrap();
        prop_assert_eq!(s.train.len() + s.test.len(), n);
        let all: BTreeSet<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
        prop_assert_eq!(all.len(), n);
    }
}

#[test]
fn positive_bias_corruption_is_monotone_in_rate() {
    let d = TwoGaussians::new(2000, 5).generate();
    let mut previous = 0.0;
    for step in 0..=5 {
        let rate = step as f64 / 10.0;
        let mut total = 0.0;
        for seed in 0..20 {
            let noisy = inject(d.labels(), d.group(), &NoiseSpec::new(NoiseKind::PositiveBias, rate, seed).unwrap())
                .unwrap()
                .labels;
            total += (0..d.len()).filter(|&i| d.group().get(i) == 1 && noisy.get(i) == 1).count() as f64;
        }
        assert!(total >= previous, "rate {rate}: {total} < {previous}");
        previous = total;
    }
}

/// Identity corrector that remembers every label vector it was shown.
struct Recorder(Mutex<Vec<Vec<u8>>>);

impl Corrector for Recorder {
    fn label(&self) -> String {
        "recorder".into()
    }

    fn correct(&self, _x: ArrayView2<'_, f64>, y: &LabelVector, _seed: u64) -> lncfair::Result<CorrectionResult> {
        self.0.lock().unwrap().push(y.as_slice().to_vec());
        Ok(CorrectionResult::identity(y))
    }
}

#[test]
fn correctors_only_see_noisy_labels() {
    let d = TwoGaussians::new(400, 6).generate();
    let recorder = Recorder(Mutex::new(Vec::new()));
    let noise_train = NoiseSpec::new(NoiseKind::BalancedBias, 0.5, 11).unwrap();
    let noise_test = NoiseSpec::new(NoiseKind::BalancedBias, 0.5, 12).unwrap();
    let spec = RunSpec {
        dataset: &d,
        noise_train,
        noise_test,
        corrector: &recorder,
        test_corrector: None,
        correction_seed: 0,
        test_correction_seed: 0,
        split_seed: 13,
        seed: 0,
        settings: RunSettings::default(),
    };
    run_single(&spec).unwrap();
    let parts = split(&d, 0.3, 13).unwrap();
    let expected_train = inject(parts.train.labels(), parts.train.group(), &noise_train).unwrap().labels;
    let expected_test = inject(parts.test.labels(), parts.test.group(), &noise_test).unwrap().labels;
    let seen = recorder.0.into_inner().unwrap();
    assert_eq!(seen, vec![expected_train.as_slice().to_vec(), expected_test.as_slice().to_vec()]);
    assert_ne!(seen[1], parts.test.labels().as_slice());
}

#[test]
fn full_grid_covers_every_cell_and_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml_str("datasets = [{ synthetic = { n = 120, seed = 1 } }]\nseeds = [0, 1, 2]\n").unwrap();
    cfg.datasets.push(DatasetEntry::Synthetic(TwoGaussians::new(150, 2)));
    cfg.output = dir.path().join("grid.jsonl");
    assert_eq!(cfg.cell_count(), 360);
    let summary = run_grid(&cfg, None, &|_, _| {}).unwrap();
    assert_eq!(summary.cells, 360);

    let lines = read_results(&summary.path).unwrap();
    let mut cells = BTreeSet::new();
    for l in &lines[1..] {
        let key = match l {
            ResultLine::Record(r) => (r.dataset.clone(), r.noise_kind, r.rate.to_bits(), r.method.clone(), r.seed),
            ResultLine::Failure(f) => (f.dataset.clone(), f.noise_kind, f.rate.to_bits(), f.method.clone(), f.seed),
            ResultLine::Header(_) => panic!("second header"),
        };
        cells.insert(key);
    }
    assert_eq!(cells.len(), 360);

    let table = emit_report(&summary.path, ReportKind::Tradeoff, MetricName::PeDif, None).unwrap();
    let text = std::fs::read_to_string(table).unwrap();
    for dataset in ["two_gaussians_120", "two_gaussians_150"] {
        for kind in NoiseKind::ALL {
            for rate in &cfg.rates {
                for scenario in [1, 2] {
                    let prefix = format!("{dataset},{kind},{scenario},noisy,{rate},");
                    assert!(text.lines().any(|l| l.starts_with(&prefix)), "missing {prefix}");
                }
            }
        }
    }
}
