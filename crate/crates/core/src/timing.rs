//! Aggregation of benchmark wall-clock measurements.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// One wall-clock measurement of one run in one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingRecord {
    pub environment_label: String,
    pub run_index: u32,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    /// Run times ordered by run index.
    pub runs: Vec<f64>,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn get(&self, label: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn max_runs(&self) -> usize {
        self.rows.iter().map(|r| r.runs.len()).max().unwrap_or(0)
    }

    /// First row; the plan lists the baseline environment first.
    pub fn baseline(&self) -> Option<&SummaryRow> {
        self.rows.first()
    }

    /// Row with the smallest average (earliest on ties).
    pub fn best(&self) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&SummaryRow>, r| match best {
                Some(b) if b.average <= r.average => Some(b),
                _ => Some(r),
            })
    }
}

/// Groups records by environment in order of first appearance and averages
/// each group.
pub fn summarize(records: &[TimingRecord]) -> Result<SummaryTable> {
    if records.is_empty() {
        return Err(CoreError::Empty);
    }
    let mut groups: Vec<(String, Vec<(u32, f64)>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(label, _)| *label == r.environment_label) {
            Some((_, runs)) => runs.push((r.run_index, r.wall_seconds)),
            None => groups.push((r.environment_label.clone(), alloc::vec![(r.run_index, r.wall_seconds)])),
        }
    }
    let rows = groups
        .into_iter()
        .map(|(label, mut runs)| {
            runs.sort_by_key(|(i, _)| *i);
            let runs: Vec<f64> = runs.into_iter().map(|(_, t)| t).collect();
            let average = runs.iter().sum::<f64>() / runs.len() as f64;
            SummaryRow { label, runs, average }
        })
        .collect();
    Ok(SummaryTable { rows })
}

/// `100 · (baseline − candidate) / baseline`; negative means slower.
pub fn percent_reduction(baseline_avg: f64, candidate_avg: f64) -> Result<f64> {
    if baseline_avg.is_nan() || baseline_avg <= 0.0 {
        return Err(CoreError::NonPositiveBaseline(baseline_avg));
    }
    Ok(100.0 * (baseline_avg - candidate_avg) / baseline_avg)
}

/// Rounds half-up (toward +∞) at `decimals` places.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = libm::pow(10.0, decimals as f64);
    libm::floor(value * scale + 0.5) / scale
}
