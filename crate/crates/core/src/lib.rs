//! Numerical core for data-parallel linear regression.
//!
//! Everything here is pure and allocation-only (`no_std` + `alloc`), so the
//! same code runs inside a worker process, inside the master, or in a
//! single-process standalone run:
//!
//! - [`gram`]: per-partition sufficient statistics (`X'ᵀX'`, `X'ᵀy`, `n`,
//!   `Σy²`) and their merge. Merging partials and solving gives exactly the
//!   same least-squares system as a single pass over the whole dataset.
//! - [`solve`]: Cholesky solve of the normal equations with a one-shot ridge
//!   fallback.
//! - [`gradient`]: un-normalized squared-error gradients, the descent step
//!   and a standardized-space driver that only needs raw-space gradients.
//! - [`eval`]: prediction and RMSE.
//! - [`split`] and [`partition`]: seeded train/test split and balanced
//!   contiguous row ranges.
//! - [`timing`]: benchmark record aggregation and percent reduction.
//!
//! Features carry an implicit leading `1` so the intercept is the first
//! coefficient of every augmented system.

#![no_std]

extern crate alloc;

pub mod error;
pub mod eval;
pub mod gradient;
pub mod gram;
pub mod model;
pub mod partition;
pub mod solve;
pub mod split;
pub mod timing;

pub use error::CoreError;
pub use eval::{predict, rmse, EvalReport};
pub use gradient::{compute_gradient_partial, fit_gradient_descent, gd_step, ColumnStats};
pub use gram::{compute_gram_partial, merge_gram, GramPartial};
pub use model::{ModelCoefficients, Sample, TrainConfig, TrainMode};
pub use partition::{make_partitions, PartitionSpec};
pub use solve::{solve_normal, NormalSolution, RIDGE_FALLBACK_EPSILON};
pub use split::{train_test_split, Split};
pub use timing::{percent_reduction, round_half_up, summarize, SummaryRow, SummaryTable, TimingRecord};

pub type Result<T, E = CoreError> = core::result::Result<T, E>;
