//! Experiment configuration as JSON.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgraph::{from_generator, parse_topology, Network, TopologyError};
use crate::schedulers::SchedulerKind;
use crate::simcore::{PairPolicy, SizeDist, WorkloadSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Where the network comes from: `{"file": "net.topo"}` or
/// `{"generator": "clique:8"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TopologySource {
    File(PathBuf),
    Generator(String),
}

impl TopologySource {
    pub fn load(&self) -> Result<Network, ConfigError> {
        match self {
            TopologySource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.clone(),
                    source,
                })?;
                Ok(parse_topology(&text)?)
            }
            TopologySource::Generator(spec) => Ok(from_generator(spec)?),
        }
    }

    /// Label used to check that sweep runs share a topology.
    pub fn label(&self) -> String {
        match self {
            TopologySource::File(p) => format!("file:{}", p.display()),
            TopologySource::Generator(g) => g.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadConfig {
    /// Requests per hour.
    pub arrival_rate: f64,
    pub size_dist: SizeDist,
    #[serde(default)]
    pub pair_policy: PairPolicy,
    pub num_requests: usize,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            arrival_rate: 100.0,
            size_dist: SizeDist::default_pareto(),
            pair_policy: PairPolicy::UniformDistinct,
            num_requests: 10_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub log: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub paths: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: Option<TopologySource>,
    pub scheduler: SchedulerKind,
    pub workload: WorkloadConfig,
    /// Replay this trace instead of generating one.
    pub trace: Option<PathBuf>,
    pub outputs: Outputs,
    pub seed: u64,
    pub warmup_fraction: f64,
    /// Capacity augmentation for competitive verification.
    pub eps: Option<f64>,
    /// Sweep loads in requests/hour.
    pub loads: Vec<f64>,
    /// Sweep schedulers; empty means just `scheduler`.
    pub schedulers: Vec<SchedulerKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: None,
            scheduler: SchedulerKind::Greedy,
            workload: WorkloadConfig::default(),
            trace: None,
            outputs: Outputs::default(),
            seed: 1,
            warmup_fraction: 0.1,
            eps: None,
            loads: Vec::new(),
            schedulers: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Checks everything that does not need the filesystem.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.topology.is_none() {
            return bad("a topology source is required");
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return bad("warmup_fraction must lie in [0, 1)");
        }
        if let Some(eps) = self.eps {
            if !(eps.is_finite() && eps > 0.0) {
                return bad("eps must be positive");
            }
        }
        if self.loads.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return bad("loads must be positive");
        }
        self.workload_spec()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn workload_spec(&self) -> WorkloadSpec {
        WorkloadSpec {
            arrival_rate: self.workload.arrival_rate,
            size_dist: self.workload.size_dist,
            pair_policy: self.workload.pair_policy.clone(),
            num_requests: self.workload.num_requests,
            seed: self.seed,
        }
    }

    pub fn sweep_schedulers(&self) -> Vec<SchedulerKind> {
        if self.schedulers.is_empty() {
            vec![self.scheduler]
        } else {
            self.schedulers.clone()
        }
    }
}
