//! Known benchmark datasets: the published characterization of each, and the
//! ones shipped with this crate together with the configuration that
//! reproduces their characterization.

use super::{load_str, DatasetConfig, LoadedDataset};
use crate::error::{Error, Result};

/// One row of the reference characterization table. Percentages are the
/// rounded integers as published.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub name: &'static str,
    pub openml_id: u32,
    pub instances: usize,
    pub features: usize,
    pub pct_positive: f64,
    pub pct_protected: f64,
    pub pct_positive_protected: f64,
    pub pct_positive_unprotected: f64,
}

const fn row(
    name: &'static str,
    openml_id: u32,
    instances: usize,
    features: usize,
    pct: [f64; 4],
) -> ReferenceRow {
    ReferenceRow {
        name,
        openml_id,
        instances,
        features,
        pct_positive: pct[0],
        pct_protected: pct[1],
        pct_positive_protected: pct[2],
        pct_positive_unprotected: pct[3],
    }
}

pub const REFERENCE: &[ReferenceRow] = &[
    row("ads", 40978, 1377, 1558, [33.0, 76.0, 34.0, 33.0]),
    row("bank", 1461, 15111, 30, [33.0, 51.0, 24.0, 43.0]),
    row("biodeg", 1494, 1055, 41, [34.0, 15.0, 5.0, 39.0]),
    row("churn", 40701, 2121, 22, [33.0, 23.0, 21.0, 37.0]),
    row("credit", 29, 653, 43, [45.0, 31.0, 47.0, 45.0]),
    row("monks1", 333, 556, 6, [50.0, 49.0, 49.0, 51.0]),
    row("phishing", 4534, 11055, 30, [56.0, 66.0, 59.0, 49.0]),
    row("sick", 38, 636, 26, [33.0, 39.0, 12.0, 47.0]),
    row("vote", 56, 312, 14, [58.0, 52.0, 54.0, 63.0]),
];

pub fn reference(name: &str) -> Option<&'static ReferenceRow> {
    REFERENCE.iter().find(|r| r.name == name)
}

/// A dataset shipped inside the crate.
#[derive(Debug, Clone, Copy)]
pub struct Bundled {
    pub name: &'static str,
    pub openml_id: u32,
    pub config_toml: &'static str,
    pub arff: &'static str,
}

pub const BUNDLED: &[Bundled] = &[
    Bundled {
        name: "monks1",
        openml_id: 333,
        config_toml: include_str!("../../../../datasets/monks1.toml"),
        arff: include_str!("../../../../datasets/monks1.arff"),
    },
    Bundled {
        name: "vote",
        openml_id: 56,
        config_toml: include_str!("../../../../datasets/vote.toml"),
        arff: include_str!("../../../../datasets/vote.arff"),
    },
    Bundled {
        name: "credit",
        openml_id: 29,
        config_toml: include_str!("../../../../datasets/credit.toml"),
        arff: include_str!("../../../../datasets/credit.arff"),
    },
];

impl Bundled {
    pub fn config(&self) -> DatasetConfig {
        DatasetConfig::from_toml_str(self.config_toml).expect("bundled config parses")
    }

    pub fn load(&self) -> Result<LoadedDataset> {
        load_str(self.arff, true, &self.config())
    }
}

pub fn by_openml_id(id: u32) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.openml_id == id)
}

pub fn bundled(name: &str) -> Result<LoadedDataset> {
    BUNDLED
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| {
            let known: Vec<&str> = BUNDLED.iter().map(|b| b.name).collect();
            Error::Config(format!("no bundled dataset `{name}`; known: {known:?}"))
        })?
        .load()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::summarize;

    #[test]
    fn bundled_configs_reference_table_rows() {
        for b in BUNDLED {
            let r = reference(b.name).expect("bundled dataset has a reference row");
            assert_eq!(r.openml_id, b.openml_id);
            assert_eq!(b.config().name, b.name);
        }
    }

    #[test]
    fn monks1_shape() {
        let loaded = bundled("monks1").unwrap();
        let s = summarize(&loaded.dataset);
        assert_eq!(s.instances, 556);
        assert_eq!(s.features, 6);
        assert_eq!(loaded.dropped_rows, 0);
        assert!((s.positive - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vote_drops_incomplete_rows() {
        let loaded = bundled("vote").unwrap();
        assert_eq!(loaded.source_rows, 435);
        assert_eq!(loaded.dropped_rows, 435 - 312);
    }

    #[test]
    fn unknown_bundled_name() {
        assert!(matches!(bundled("iris"), Err(Error::Config(_))));
    }
}
