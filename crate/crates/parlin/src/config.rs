//! JSON configuration shared by every subcommand.
//!
//! ```json
//! {
//!   "dataset": { "path": "flights.csv", "spec": { "n_records": 500000 } },
//!   "train":   { "mode": "normal_equations" },
//!   "split":   { "ratio": 0.7, "seed": 7 },
//!   "cluster": { "port": 7077, "expected_workers": 2, "admission_timeout_s": 60 },
//!   "bench":   { "environments": [{ "label": "Standalone", "workers": 0 }],
//!                "repetitions": 5, "output_dir": "bench-out" }
//! }
//! ```
//!
//! Every section is optional and unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::time::Duration;

use parlin_core::TrainConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{standard_environments, Environment, ExperimentPlan};
use crate::cluster::{JobSpec, DEFAULT_PORT};
use crate::data::{CsvSchema, DatasetSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid config: {0}")]
    Invalid(String),
}

pub type Result<T, E = ConfigError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub dataset: DatasetConfig,
    pub train: TrainConfig,
    pub split: SplitConfig,
    pub cluster: ClusterConfig,
    pub bench: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub path: Option<PathBuf>,
    /// Feature column names; the target column is implied.
    pub columns: Option<Vec<String>>,
    /// Generator parameters for `gen-data`; also fixes the schema width.
    pub spec: Option<DatasetSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub ratio: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { ratio: 0.7, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub port: u16,
    pub expected_workers: u32,
    pub admission_timeout_s: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            expected_workers: 1,
            admission_timeout_s: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub environments: Vec<Environment>,
    pub repetitions: u32,
    pub output_dir: PathBuf,
    /// Training used by bench jobs; `None` means 50 gradient-descent rounds.
    pub train: Option<TrainConfig>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            environments: standard_environments(),
            repetitions: 5,
            output_dir: PathBuf::from("bench-out"),
            train: None,
        }
    }
}

impl Config {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    /// Replaces every seed (generator, split, training) with `seed`.
    pub fn override_seed(&mut self, seed: u64) {
        self.split.seed = seed;
        self.train.seed = seed;
        if let Some(spec) = self.dataset.spec.as_mut() {
            spec.seed = seed;
        }
        if let Some(train) = self.bench.train.as_mut() {
            train.seed = seed;
        }
    }

    pub fn schema(&self) -> CsvSchema {
        match (&self.dataset.columns, &self.dataset.spec) {
            (Some(cols), _) => CsvSchema::from_features(cols.iter().cloned()),
            (None, Some(spec)) => spec.schema(),
            (None, None) => CsvSchema::flight(DatasetSpec::default().n_features),
        }
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        self.dataset.spec.clone().unwrap_or_default()
    }

    /// Path of an existing dataset file.
    pub fn dataset_path(&self) -> Result<&Path> {
        let path = self
            .dataset
            .path
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("dataset.path is required".into()))?;
        if !path.is_file() {
            return Err(ConfigError::Invalid(format!("dataset {} does not exist", path.display())));
        }
        Ok(path)
    }

    pub fn admission_timeout(&self) -> Result<Duration> {
        Duration::try_from_secs_f64(self.cluster.admission_timeout_s)
            .map_err(|_| ConfigError::Invalid("admission_timeout_s must be a non-negative number".into()))
    }

    pub fn job_spec(&self, workers: u32) -> Result<JobSpec> {
        let mut job = JobSpec::new(self.dataset_path()?, self.schema());
        job.train = self.train.clone();
        job.split_ratio = self.split.ratio;
        job.split_seed = self.split.seed;
        job.expected_workers = workers;
        job.admission_timeout = self.admission_timeout()?;
        job.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(job)
    }

    pub fn bench_train(&self) -> TrainConfig {
        self.bench.train.clone().unwrap_or_else(|| TrainConfig {
            seed: self.train.seed,
            ..TrainConfig::gradient_descent(50, 0.1)
        })
    }

    pub fn plan(&self) -> Result<ExperimentPlan> {
        let mut job = self.job_spec(0)?;
        job.train = self.bench_train();
        job.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let plan = ExperimentPlan {
            environments: self.bench.environments.clone(),
            repetitions: self.bench.repetitions,
            job,
        };
        plan.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(plan)
    }
}
