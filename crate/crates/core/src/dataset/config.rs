use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_local, openml, LoadedDataset};
use crate::error::{Error, Result};

/// Where the raw data lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// Local file; relative paths resolve against the config file's directory.
    Path(PathBuf),
    /// OpenML dataset id, fetched into the cache on first use.
    Openml(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalEncoding {
    /// Binary nominal columns become one 0/1 column, wider ones one column
    /// per declared level.
    #[default]
    OneHot,
    /// One column holding the level's numeric value (or its index when the
    /// level is not a number).
    Ordinal,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodingRules {
    /// Delimited-text columns holding categories. Every other non-target,
    /// non-sensitive column must parse as a number.
    pub categorical: Vec<String>,
    /// Encoding applied to nominal columns not listed below.
    pub default: CategoricalEncoding,
    pub ordinal: Vec<String>,
    pub one_hot: Vec<String>,
}

impl EncodingRules {
    pub(crate) fn encoding_for(&self, column: &str) -> CategoricalEncoding {
        if self.ordinal.iter().any(|c| c == column) {
            CategoricalEncoding::Ordinal
        } else if self.one_hot.iter().any(|c| c == column) {
            CategoricalEncoding::OneHot
        } else {
            self.default
        }
    }
}

fn default_delimiter() -> char {
    ','
}

fn default_missing() -> Vec<String> {
    vec![String::new()]
}

/// How to turn one raw table into a [`Dataset`](super::Dataset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub source: DatasetSource,
    /// Class column.
    pub target: String,
    /// Raw class value re-encoded as label 1.
    pub positive: String,
    /// Sensitive column; consumed into the group assignment.
    pub sensitive: String,
    /// Raw sensitive value re-encoded as group 1.
    pub protected: String,
    #[serde(default)]
    pub drop: Vec<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Cell contents treated as missing in delimited text. ARFF always uses `?`.
    #[serde(default = "default_missing")]
    pub missing: Vec<String>,
    #[serde(default)]
    pub encoding: EncodingRules,
}

impl DatasetConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("dataset config serializes")
    }

    /// Loads the configured dataset. `base_dir` anchors relative paths;
    /// `cache_dir` holds OpenML downloads.
    pub fn load(&self, base_dir: &Path, cache_dir: &Path) -> Result<LoadedDataset> {
        match &self.source {
            DatasetSource::Path(p) => {
                let path = if p.is_absolute() {
                    p.clone()
                } else {
                    base_dir.join(p)
                };
                load_local(&path, self)
            }
            DatasetSource::Openml(id) => {
                let path = openml::OpenMlClient::default().fetch(*id, cache_dir)?.path;
                load_local(&path, self)
            }
        }
    }
}
