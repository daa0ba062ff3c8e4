//! Experiment configuration: a TOML file whose keys can each be overridden
//! from the command line.

use std::path::{Path, PathBuf};

use hcim::seedsel::Method;
use serde::Deserialize;
use thiserror::Error;

use crate::datasets;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Config file contents before validation. Every field is optional so CLI
/// flags can fill or override it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub datasets: Option<Vec<String>>,
    pub data_dir: Option<PathBuf>,
    pub methods: Option<Vec<String>>,
    pub k: Option<Vec<usize>>,
    pub p: Option<Vec<f64>>,
    pub r: Option<usize>,
    pub theta: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    /// Per-cell time limit in seconds.
    pub timeout: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Cut every dendrogram at this many communities instead of the modularity peak.
    pub communities: Option<usize>,
    /// Write wall-clock columns; off makes every output file reproducible byte for byte.
    pub timing: Option<bool>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: RawConfig) -> RawConfig {
        RawConfig {
            datasets: other.datasets.or(self.datasets),
            data_dir: other.data_dir.or(self.data_dir),
            methods: other.methods.or(self.methods),
            k: other.k.or(self.k),
            p: other.p.or(self.p),
            r: other.r.or(self.r),
            theta: other.theta.or(self.theta),
            alpha: other.alpha.or(self.alpha),
            seed: other.seed.or(self.seed),
            timeout: other.timeout.or(self.timeout),
            out: other.out.or(self.out),
            workers: other.workers.or(self.workers),
            communities: other.communities.or(self.communities),
            timing: other.timing.or(self.timing),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRef {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetRef>,
    pub methods: Vec<Method>,
    pub k: Vec<usize>,
    pub p: Vec<f64>,
    pub r: usize,
    pub theta: usize,
    pub alpha: f64,
    pub seed: u64,
    pub timeout: Option<f64>,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub communities: Option<usize>,
    pub timing: bool,
}

pub const DEFAULT_R: usize = 100;
pub const DEFAULT_THETA: usize = 2;
pub const DEFAULT_ALPHA: f64 = 1.0;

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = ConfigError;

    fn try_from(raw: RawConfig) -> Result<Self, ConfigError> {
        let data_dir = raw.data_dir.unwrap_or_else(datasets::default_data_dir);
        let datasets: Vec<DatasetRef> = raw
            .datasets
            .unwrap_or_default()
            .iter()
            .map(|d| datasets::resolve(d, &data_dir))
            .collect();
        if datasets.is_empty() {
            return Err(invalid("at least one dataset is required"));
        }

        let mut methods = Vec::new();
        for m in raw.methods.unwrap_or_default() {
            let m: Method = m.parse().map_err(|e: hcim::Error| invalid(e.to_string()))?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        if methods.is_empty() {
            return Err(invalid("at least one method is required"));
        }

        let k = raw.k.unwrap_or_default();
        if k.is_empty() || k.contains(&0) {
            return Err(invalid("k grid must be nonempty with every k >= 1"));
        }
        let p = raw.p.unwrap_or_default();
        if p.is_empty() || p.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("p grid must be nonempty with every p in [0, 1]"));
        }
        let r = raw.r.unwrap_or(DEFAULT_R);
        if r == 0 {
            return Err(invalid("r must be at least 1"));
        }
        let alpha = raw.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid("alpha must be a nonnegative number"));
        }
        if let Some(t) = raw.timeout {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("timeout must be a positive number of seconds"));
            }
        }
        if raw.workers == Some(0) {
            return Err(invalid("workers must be at least 1"));
        }
        if raw.communities == Some(0) {
            return Err(invalid("community count must be at least 1"));
        }

        Ok(ExperimentConfig {
            datasets,
            methods,
            k,
            p,
            r,
            theta: raw.theta.unwrap_or(DEFAULT_THETA),
            alpha,
            seed: raw.seed.unwrap_or(0),
            timeout: raw.timeout,
            out: raw.out.unwrap_or_else(|| PathBuf::from("results")),
            workers: raw.workers,
            communities: raw.communities,
            timing: raw.timing.unwrap_or(true),
        })
    }
}
