use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// Half-open row range `[row_start, row_end)` owned by one worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub partition_id: u32,
    pub row_start: u64,
    pub row_end: u64,
}

impl PartitionSpec {
    pub fn len(&self) -> u64 {
        self.row_end - self.row_start
    }

    pub fn is_empty(&self) -> bool {
        self.row_end <= self.row_start
    }

    pub fn range(&self) -> core::ops::Range<usize> {
        self.row_start as usize..self.row_end as usize
    }
}

/// `k` contiguous ranges over `0..n_rows`; sizes differ by at most one and
/// the leading partitions take the extra rows.
pub fn make_partitions(n_rows: u64, k: u32) -> Result<Vec<PartitionSpec>> {
    if k == 0 || n_rows < k as u64 {
        return Err(CoreError::TooFewRows {
            rows: n_rows as usize,
            parts: k as usize,
        });
    }
    let base = n_rows / k as u64;
    let extra = n_rows % k as u64;
    let mut start = 0;
    Ok((0..k)
        .map(|id| {
            let len = base + u64::from((id as u64) < extra);
            let part = PartitionSpec {
                partition_id: id,
                row_start: start,
                row_end: start + len,
            };
            start += len;
            part
        })
        .collect())
}
