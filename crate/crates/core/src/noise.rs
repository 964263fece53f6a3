//! Group-dependent label noise.
//!
//! Both generators draw one uniform number per eligible row, in row order,
//! from a stream seeded by the spec. Draws are taken even where the flip
//! would be a no-op, so the stream position of row `i` never depends on the
//! labels.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{GroupAssignment, LabelVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Protected rows become positive with probability `rate`.
    PositiveBias,
    /// Protected rows become positive and unprotected rows negative, each
    /// with probability `rate`.
    BalancedBias,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 2] = [NoiseKind::PositiveBias, NoiseKind::BalancedBias];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::PositiveBias => "positive_bias",
            NoiseKind::BalancedBias => "balanced_bias",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::validation(format!(
                    "unknown noise kind `{s}`; expected positive_bias or balanced_bias"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, rate: f64, seed: u64) -> Result<Self> {
        let spec = NoiseSpec { kind, rate, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::validation(format!(
                "noise rate must lie in [0, 1], got {}",
                self.rate
            )));
        }
        Ok(())
    }
}

/// Noisy labels plus the rows whose label actually changed.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyLabels {
    pub labels: LabelVector,
    pub flipped: Vec<bool>,
}

impl NoisyLabels {
    pub fn flip_count(&self) -> usize {
        self.flipped.iter().filter(|&&f| f).count()
    }
}

fn check(labels: &LabelVector, group: &GroupAssignment, spec: &NoiseSpec, kind: NoiseKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::validation(format!(
            "spec kind is {}, expected {kind}",
            spec.kind
        )));
    }
    spec.validate()?;
    if labels.len() != group.len() {
        return Err(Error::validation(format!(
            "{} labels but {} group flags",
            labels.len(),
            group.len()
        )));
    }
    Ok(())
}

pub fn inject_positive_bias(
    labels: &LabelVector,
    group: &GroupAssignment,
    spec: &NoiseSpec,
) -> Result<NoisyLabels> {
    check(labels, group, spec, NoiseKind::PositiveBias)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = labels.as_slice().to_vec();
    for (y, &g) in out.iter_mut().zip(group.as_slice()) {
        if g == 1 && rng.random::<f64>() < spec.rate {
            *y = 1;
        }
    }
    Ok(finish(labels, out))
}

pub fn inject_balanced_bias(
    labels: &LabelVector,
    group: &GroupAssignment,
    spec: &NoiseSpec,
) -> Result<NoisyLabels> {
    check(labels, group, spec, NoiseKind::BalancedBias)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = labels.as_slice().to_vec();
    for (y, &g) in out.iter_mut().zip(group.as_slice()) {
        if rng.random::<f64>() < spec.rate {
            *y = g;
        }
    }
    Ok(finish(labels, out))
}

/// Dispatches on `spec.kind`.
pub fn inject(labels: &LabelVector, group: &GroupAssignment, spec: &NoiseSpec) -> Result<NoisyLabels> {
    match spec.kind {
        NoiseKind::PositiveBias => inject_positive_bias(labels, group, spec),
        NoiseKind::BalancedBias => inject_balanced_bias(labels, group, spec),
    }
}

fn finish(before: &LabelVector, after: Vec<u8>) -> NoisyLabels {
    let flipped = before
        .as_slice()
        .iter()
        .zip(&after)
        .map(|(a, b)| a != b)
        .collect();
    NoisyLabels {
        labels: LabelVector::new(after).expect("binary by construction"),
        flipped,
    }
}
