//! Master/worker execution of a regression job, plus the network-free
//! standalone pipeline used as the single-machine baseline.
//!
//! A job is always: admit workers, assign each one a train range and a test
//! range of the seeded split, train (one Gram round, or one Gram round plus
//! `iterations` gradient rounds), then one SSE round over the test split.
//! Partials are merged in ascending rank order so results are bitwise
//! reproducible for a given worker count.

use std::io;
use std::path::PathBuf;
use std::time::Duration;

use parlin_core::{CoreError, EvalReport, ModelCoefficients, PartitionSpec, TrainConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{CsvSchema, DataError};
use crate::protocol::FrameError;

mod master;
mod pipeline;
mod shard;
mod standalone;
mod worker;

pub use master::{master_run, Master};
pub use shard::Shard;
pub use standalone::standalone_run;
pub use worker::{worker_run, worker_run_with, WorkerOptions};

pub const DEFAULT_PORT: u16 = 7077;
pub const DEFAULT_ADMISSION_TIMEOUT: Duration = Duration::from_secs(60);
pub const MAX_WORKERS: u32 = 64;

/// Process exit codes shared by the master, worker and CLI.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const JOB_FAILURE: i32 = 2;
    pub const TIMEOUT: i32 = 3;
    pub const DATA: i32 = 4;
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("dataset error: {0}")]
    Data(#[from] DataError),

    #[error("training failed: {0}")]
    Core(#[from] CoreError),

    #[error("worker {rank} failed: {reason}")]
    WorkerFailed { rank: u32, reason: String },

    #[error("admission timed out after {waited:?}: {admitted} of {expected} workers joined")]
    AdmissionTimeout {
        admitted: u32,
        expected: u32,
        waited: Duration,
    },

    #[error("rejected by master: {0}")]
    Rejected(String),

    #[error("protocol error: {0}")]
    Protocol(#[from] FrameError),

    #[error("network error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid job: {0}")]
    InvalidJob(String),
}

impl ClusterError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ClusterError::AdmissionTimeout { .. } => exit::TIMEOUT,
            ClusterError::Data(_) | ClusterError::InvalidJob(_) => exit::DATA,
            _ => exit::JOB_FAILURE,
        }
    }
}

pub type Result<T, E = ClusterError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub dataset_path: PathBuf,
    pub schema: CsvSchema,
    pub train: TrainConfig,
    pub split_ratio: f64,
    pub split_seed: u64,
    /// Zero means standalone.
    pub expected_workers: u32,
    pub admission_timeout: Duration,
    /// Table label; defaults to `Standalone` / `Cluster_<k>`.
    pub environment_label: Option<String>,
}

impl JobSpec {
    pub fn new(dataset_path: impl Into<PathBuf>, schema: CsvSchema) -> Self {
        Self {
            dataset_path: dataset_path.into(),
            schema,
            train: TrainConfig::default(),
            split_ratio: 0.7,
            split_seed: 0,
            expected_workers: 0,
            admission_timeout: DEFAULT_ADMISSION_TIMEOUT,
            environment_label: None,
        }
    }

    pub fn with_workers(&self, k: u32) -> Self {
        Self {
            expected_workers: k,
            ..self.clone()
        }
    }

    pub fn label(&self) -> String {
        self.environment_label.clone().unwrap_or_else(|| default_label(self.expected_workers))
    }

    pub fn validate(&self) -> Result<()> {
        if self.expected_workers > MAX_WORKERS {
            return Err(ClusterError::InvalidJob(format!(
                "expected_workers {} exceeds {MAX_WORKERS}",
                self.expected_workers
            )));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(ClusterError::InvalidJob(format!("split_ratio {} is outside (0, 1)", self.split_ratio)));
        }
        self.schema.validate()?;
        self.train.validate()?;
        Ok(())
    }
}

pub fn default_label(workers: u32) -> String {
    if workers == 0 {
        "Standalone".to_string()
    } else {
        format!("Cluster_{workers}")
    }
}

/// Train and test ranges handed to one worker rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub rank: u32,
    pub train: PartitionSpec,
    pub test: PartitionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobResult {
    pub coefficients: ModelCoefficients,
    pub eval: EvalReport,
    /// Monotonic wall time from worker admission (or job start when
    /// standalone) to result.
    pub wall_seconds: f64,
    pub environment_label: String,
    pub workers_used: u32,
    pub ridge_fallback: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assignments: Vec<Assignment>,
}

/// Train and test sizes for `n_records` rows, rejecting degenerate splits.
pub(crate) fn split_sizes(n_records: u64, ratio: f64) -> Result<(u64, u64)> {
    let n_train = parlin_core::split::train_count(n_records as usize, ratio) as u64;
    if n_records < 2 || n_train == 0 || n_train >= n_records {
        return Err(ClusterError::InvalidJob(format!(
            "a {ratio} split of {n_records} rows leaves an empty side"
        )));
    }
    Ok((n_train, n_records - n_train))
}
