use std::time::Instant;

use parlin_core::{GramPartial, ModelCoefficients, PartitionSpec};

use super::pipeline::{train_and_evaluate, Reducer};
use super::{split_sizes, ClusterError, JobResult, JobSpec, Result, Shard};
use crate::data;
use crate::protocol::Scope;

impl Reducer for Shard {
    fn gram(&mut self, scope: Scope) -> Result<GramPartial> {
        Shard::gram(self, scope)
    }

    fn gradient(&mut self, theta: &ModelCoefficients) -> Result<(Vec<f64>, u64)> {
        Shard::gradient(self, theta)
    }

    fn sse(&mut self, theta: &ModelCoefficients) -> Result<(f64, u64)> {
        Shard::sse(self, theta)
    }
}

/// Runs the whole pipeline in-process over a single partition.
///
/// The row count is taken before the clock starts, matching the master,
/// which counts rows before admitting workers.
pub fn standalone_run(job: &JobSpec) -> Result<JobResult> {
    job.validate()?;
    if job.expected_workers != 0 {
        return Err(ClusterError::InvalidJob("standalone runs take no workers".into()));
    }
    let n_records = data::count_rows(&job.dataset_path, &job.schema)?;
    let (n_train, n_test) = split_sizes(n_records, job.split_ratio)?;

    let start = Instant::now();
    let mut shard = Shard::new(
        job.dataset_path.clone(),
        job.schema.clone(),
        n_records,
        job.split_seed,
        job.split_ratio,
        PartitionSpec { partition_id: 0, row_start: 0, row_end: n_train },
        PartitionSpec { partition_id: 0, row_start: 0, row_end: n_test },
    );
    let trained = train_and_evaluate(&mut shard, &job.train)?;
    let wall_seconds = start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);

    Ok(JobResult {
        coefficients: trained.coefficients,
        eval: trained.eval,
        wall_seconds,
        environment_label: job.label(),
        workers_used: 0,
        ridge_fallback: trained.ridge_fallback,
        assignments: Vec::new(),
    })
}
