//! Minimal OpenML client: resolves a dataset id to its data file and caches
//! it under `<cache_dir>/<id>/data.arff`.
//!
//! The cache is never invalidated. Concurrent first fetches of one id are
//! serialized through a `.lock` file next to the data file.

use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::error::{Error, Result};

pub const DEFAULT_BASE_URL: &str = "https://www.openml.org";

const LOCK_WAIT: Duration = Duration::from_secs(300);

#[derive(Debug, Clone)]
pub struct OpenMlClient {
    base_url: String,
    timeout: Duration,
}

impl Default for OpenMlClient {
    fn default() -> Self {
        let base_url = std::env::var("LNCFAIR_OPENML_URL")
            .unwrap_or_else(|_| DEFAULT_BASE_URL.to_owned());
        OpenMlClient::new(base_url)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchOutcome {
    pub path: PathBuf,
    /// True when the file was already cached and no request was made.
    pub cached: bool,
}

#[derive(Deserialize)]
struct DescriptionEnvelope {
    data_set_description: Description,
}

#[derive(Deserialize)]
struct Description {
    file_id: serde_json::Value,
    #[serde(default)]
    format: Option<String>,
}

struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub fn cache_path(cache_dir: &Path, id: u32) -> PathBuf {
    cache_dir.join(id.to_string()).join("data.arff")
}

impl OpenMlClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        OpenMlClient {
            base_url: base_url.into().trim_end_matches('/').to_owned(),
            timeout: Duration::from_secs(120),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn fetch(&self, id: u32, cache_dir: &Path) -> Result<FetchOutcome> {
        if id == 0 {
            return Err(Error::validation("OpenML ids are positive integers"));
        }
        let target = cache_path(cache_dir, id);
        if target.is_file() {
            return Ok(FetchOutcome {
                path: target,
                cached: true,
            });
        }
        let dir = target.parent().expect("cache path has a parent").to_owned();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let _guard = match self.acquire_lock(&dir, &target)? {
            Some(guard) => guard,
            // Another process finished the download while we waited.
            None => {
                return Ok(FetchOutcome {
                    path: target,
                    cached: true,
                })
            }
        };
        if target.is_file() {
            return Ok(FetchOutcome {
                path: target,
                cached: true,
            });
        }

        let desc_url = format!("{}/api/v1/json/data/{id}", self.base_url);
        let body = self.get(&desc_url)?;
        let envelope: DescriptionEnvelope = serde_json::from_str(&body)
            .map_err(|e| Error::Fetch(format!("bad description for dataset {id}: {e}")))?;
        let desc = envelope.data_set_description;
        if let Some(fmt) = &desc.format {
            if !fmt.eq_ignore_ascii_case("arff") {
                return Err(Error::Fetch(format!(
                    "dataset {id} is stored as `{fmt}`; only ARFF is supported"
                )));
            }
        }
        let file_id = match &desc.file_id {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(Error::Fetch(format!(
                    "dataset {id} has unusable file_id {other}"
                )))
            }
        };
        let data = self.get(&format!("{}/data/v1/download/{file_id}", self.base_url))?;
        let tmp = dir.join("data.arff.partial");
        fs::write(&tmp, data).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &target).map_err(|e| Error::io(&target, e))?;
        Ok(FetchOutcome {
            path: target,
            cached: false,
        })
    }

    fn acquire_lock(&self, dir: &Path, target: &Path) -> Result<Option<LockGuard>> {
        let lock = dir.join(".lock");
        let start = Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&lock) {
                Ok(_) => return Ok(Some(LockGuard(lock))),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    if target.is_file() {
                        return Ok(None);
                    }
                    if start.elapsed() > LOCK_WAIT {
                        return Err(Error::Fetch(format!(
                            "timed out waiting for lock {}",
                            lock.display()
                        )));
                    }
                    std::thread::sleep(Duration::from_millis(50));
                }
                Err(e) => return Err(Error::io(&lock, e)),
            }
        }
    }

    fn get(&self, url: &str) -> Result<String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        match agent.get(url).call() {
            Ok(mut resp) => resp
                .body_mut()
                .with_config()
                .limit(1 << 30)
                .read_to_string()
                .map_err(|e| Error::Fetch(format!("reading {url}: {e}"))),
            Err(ureq::Error::StatusCode(status)) => Err(Error::HttpStatus {
                status,
                url: url.to_owned(),
            }),
            Err(e) => Err(Error::Fetch(format!("{url}: {e}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_id_is_rejected_without_touching_disk() {
        let dir = tempfile::tempdir().unwrap();
        let err = OpenMlClient::new("http://127.0.0.1:9").fetch(0, dir.path());
        assert!(matches!(err, Err(Error::Validation(_))));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn warm_cache_makes_no_request() {
        let dir = tempfile::tempdir().unwrap();
        let path = cache_path(dir.path(), 333);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, "@relation x\n@attribute a numeric\n@data\n1\n").unwrap();
        // Port 9 (discard) is never served; any request would fail.
        let out = OpenMlClient::new("http://127.0.0.1:9")
            .fetch(333, dir.path())
            .unwrap();
        assert!(out.cached);
        assert_eq!(out.path, path);
    }

    #[test]
    fn unreachable_host_with_cold_cache_is_fetch_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = OpenMlClient::new("http://127.0.0.1:9")
            .fetch(333, dir.path())
            .unwrap_err();
        assert!(matches!(err, Error::Fetch(_)), "{err:?}");
        assert!(!dir.path().join("333").join(".lock").exists());
    }
}
