use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{CoreError, Result};

/// Record indices on each side of a train/test split, in shuffled order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Train size for `n_records` at `ratio`: `floor(ratio · n)`.
pub fn train_count(n_records: usize, ratio: f64) -> usize {
    libm::floor(ratio * n_records as f64) as usize
}

/// Seeded shuffle of `0..n_records`; the first `floor(ratio · n)` entries
/// are the training set and the remainder the test set.
pub fn train_test_split(n_records: usize, ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CoreError::InvalidRatio(ratio));
    }
    let n_train = train_count(n_records, ratio);
    if n_records < 2 || n_train == 0 || n_train >= n_records {
        return Err(CoreError::DegenerateSplit {
            n: n_records,
            ratio,
            train: n_train,
            test: n_records.saturating_sub(n_train),
        });
    }
    let mut order: Vec<usize> = (0..n_records).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = order.split_off(n_train);
    Ok(Split { train: order, test })
}
