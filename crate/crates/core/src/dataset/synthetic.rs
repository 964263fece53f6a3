//! Seeded synthetic datasets with known clean labels.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, GroupAssignment, LabelVector};

/// Two Gaussian classes plus one feature that tracks group membership.
///
/// Labels and groups are each split exactly in half and independent of each
/// other, so the clean labels are fair. Class `y` draws its two informative
/// features from `N(±separation, 1)`; the proxy feature is
/// `g + N(0, proxy_noise²)`, which lets a model trained on group-biased labels
/// reproduce the bias without seeing the sensitive attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoGaussians {
    pub n: usize,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default = "default_proxy_noise")]
    pub proxy_noise: f64,
    pub seed: u64,
}

fn default_separation() -> f64 {
    1.0
}

fn default_proxy_noise() -> f64 {
    0.5
}

impl TwoGaussians {
    pub fn new(n: usize, seed: u64) -> Self {
        TwoGaussians {
            n,
            separation: default_separation(),
            proxy_noise: default_proxy_noise(),
            seed,
        }
    }

    pub fn generate(&self) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let labels = balanced_flags(self.n, &mut rng);
        let group = balanced_flags(self.n, &mut rng);
        let mut features = Array2::zeros((self.n, 3));
        for i in 0..self.n {
            let sign = if labels[i] == 1 { 1.0 } else { -1.0 };
            features[[i, 0]] = sign * self.separation + standard_normal(&mut rng);
            features[[i, 1]] = sign * self.separation + standard_normal(&mut rng);
            features[[i, 2]] = group[i] as f64 + self.proxy_noise * standard_normal(&mut rng);
        }
        Dataset::with_feature_names(
            format!("two_gaussians_{}", self.n),
            features,
            vec!["x0".into(), "x1".into(), "proxy".into()],
            LabelVector::new(labels).expect("binary"),
            GroupAssignment::new(group).expect("binary"),
        )
        .expect("finite synthetic data")
    }
}

/// Linearly separable boxes: class 1 in `[1,3]^2`, class 0 in `[-3,-1]^2`,
/// groups balanced and independent of the class.
pub fn separable_boxes(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = balanced_flags(n, &mut rng);
    let group = balanced_flags(n, &mut rng);
    let features = Array2::from_shape_fn((n, 2), |(i, _)| {
        let base = if labels[i] == 1 { 1.0 } else { -3.0 };
        base + 2.0 * rng.random::<f64>()
    });
    Dataset::new(
        format!("separable_{n}"),
        features,
        LabelVector::new(labels).expect("binary"),
        GroupAssignment::new(group).expect("binary"),
    )
    .expect("finite synthetic data")
}

/// Every feature row identical; labels and groups balanced.
pub fn constant_features(n: usize, n_features: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = balanced_flags(n, &mut rng);
    let group = balanced_flags(n, &mut rng);
    Dataset::new(
        format!("constant_{n}"),
        Array2::from_elem((n, n_features), 0.5),
        LabelVector::new(labels).expect("binary"),
        GroupAssignment::new(group).expect("binary"),
    )
    .expect("finite synthetic data")
}

fn balanced_flags(n: usize, rng: &mut impl Rng) -> Vec<u8> {
    let mut v: Vec<u8> = (0..n).map(|i| u8::from(i < n / 2)).collect();
    v.shuffle(rng);
    v
}

/// Box-Muller draw.
pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
