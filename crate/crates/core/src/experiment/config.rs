use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::correction::{MethodId, MethodParams};
use crate::dataset::synthetic::TwoGaussians;
use crate::dataset::{registry, Dataset, DatasetConfig};
use crate::error::{Error, Result};
use crate::learners::LogRegParams;
use crate::noise::NoiseKind;

/// Where one grid dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetEntry {
    /// A dataset shipped with the crate, by name.
    Bundled(String),
    /// Path to a dataset config file, relative to the experiment config.
    Config(PathBuf),
    Synthetic(TwoGaussians),
}

impl DatasetEntry {
    pub fn load(&self, base_dir: &Path, cache_dir: &Path) -> Result<Dataset> {
        match self {
            DatasetEntry::Bundled(name) => Ok(registry::bundled(name)?.dataset),
            DatasetEntry::Config(path) => {
                let path = base_dir.join(path);
                let cfg = DatasetConfig::from_file(&path)?;
                let dir = path.parent().unwrap_or(base_dir);
                Ok(cfg.load(dir, cache_dir)?.dataset)
            }
            DatasetEntry::Synthetic(spec) => Ok(spec.generate()),
        }
    }
}

fn default_kinds() -> Vec<NoiseKind> {
    NoiseKind::ALL.to_vec()
}

fn default_rates() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5]
}

fn default_methods() -> Vec<MethodParams> {
    MethodId::ALL.iter().map(|m| m.default_params()).collect()
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_test_fraction() -> f64 {
    0.3
}

fn default_threshold() -> f64 {
    0.5
}

fn default_output() -> PathBuf {
    PathBuf::from("results.jsonl")
}

fn default_cache() -> PathBuf {
    PathBuf::from("cache")
}

/// A full experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetEntry>,
    #[serde(default = "default_kinds")]
    pub noise_kinds: Vec<NoiseKind>,
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodParams>,
    /// Replicates; each one gets its own split, noise and correction seeds.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub learner: LogRegParams,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Corrects the test set with this method instead of the method under
    /// evaluation.
    #[serde(default)]
    pub test_correction: Option<MethodParams>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_cache")]
    pub cache_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        for d in &mut self.datasets {
            if let DatasetEntry::Config(p) = d {
                *p = base.join(&*p);
            }
        }
        self.output = base.join(&self.output);
        self.cache_dir = base.join(&self.cache_dir);
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.datasets.is_empty() {
            return fail("at least one dataset is required".into());
        }
        if self.noise_kinds.is_empty() {
            return fail("at least one noise kind is required".into());
        }
        if self.rates.is_empty() {
            return fail("at least one noise rate is required".into());
        }
        if let Some(r) = self.rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return fail(format!("noise rate {r} outside [0, 1]"));
        }
        if self.methods.is_empty() {
            return fail("at least one correction method is required".into());
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail(format!("test_fraction {} outside (0, 1)", self.test_fraction));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return fail(format!("threshold {} outside [0, 1]", self.threshold));
        }
        for m in self.methods.iter().chain(&self.test_correction) {
            m.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.datasets.len()
            * self.noise_kinds.len()
            * self.rates.len()
            * self.methods.len()
            * self.seeds.len()
    }
}
