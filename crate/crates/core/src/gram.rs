//! Sufficient statistics for least squares over a row partition.
//!
//! With the intercept-augmented row `x' = [1, x_1, .., x_d]` a partition is
//! summarized by `A = Σ x'x'ᵀ`, `b = Σ y·x'`, the row count and `Σ y²`.
//! These add elementwise across partitions, so a merged partial is the same
//! system a single pass over all rows would build.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result, Sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramPartial {
    /// Augmented dimension `d + 1`.
    pub dim: usize,
    /// Row-major `dim × dim`, exactly symmetric.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub n: u64,
    pub sum_yy: f64,
}

impl GramPartial {
    pub fn zero(n_features: usize) -> Self {
        let dim = n_features + 1;
        Self {
            dim,
            a: vec![0.0; dim * dim],
            b: vec![0.0; dim],
            n: 0,
            sum_yy: 0.0,
        }
    }

    pub fn n_features(&self) -> usize {
        self.dim - 1
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.a[row * self.dim + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }

    /// Structural checks for a partial received from elsewhere.
    pub fn is_well_formed(&self) -> bool {
        self.dim >= 1
            && self.a.len() == self.dim * self.dim
            && self.b.len() == self.dim
            && self.a.iter().chain(self.b.iter()).all(|v| v.is_finite())
            && self.sum_yy.is_finite()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.at(i, j).to_bits() == self.at(j, i).to_bits()))
    }

    /// Positive semidefinite up to round-off: an `LDLᵀ` sweep whose pivots
    /// never drop below `-tol · trace(A)`. Near-zero pivots are treated as
    /// rank deficiency and skipped.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let p = self.dim;
        let floor = tol * libm::fabs(self.trace());
        let mut m = self.a.clone();
        for k in 0..p {
            let pivot = m[k * p + k];
            if pivot < -floor {
                return false;
            }
            if pivot <= floor {
                continue;
            }
            for i in k + 1..p {
                let f = m[i * p + k] / pivot;
                for j in k + 1..p {
                    m[i * p + j] -= f * m[k * p + j];
                }
            }
        }
        true
    }

    fn accumulate(&mut self, sample: &Sample) {
        let p = self.dim;
        // x' = [1, features..]; only the upper triangle is accumulated here.
        let x = |i: usize| if i == 0 { 1.0 } else { sample.features[i - 1] };
        let y = sample.target;
        for i in 0..p {
            let xi = x(i);
            let row = &mut self.a[i * p..(i + 1) * p];
            for (j, cell) in row.iter_mut().enumerate().skip(i) {
                *cell += xi * x(j);
            }
            self.b[i] += y * xi;
        }
        self.n += 1;
        self.sum_yy += y * y;
    }

    fn mirror_upper(&mut self) {
        let p = self.dim;
        for i in 0..p {
            for j in 0..i {
                self.a[i * p + j] = self.a[j * p + i];
            }
        }
    }
}

/// Accumulates the partial for `samples` in input order.
pub fn compute_gram_partial(n_features: usize, samples: &[Sample]) -> Result<GramPartial> {
    let mut g = GramPartial::zero(n_features);
    for (index, s) in samples.iter().enumerate() {
        if s.dim() != n_features {
            return Err(CoreError::DimensionMismatch {
                index,
                expected: n_features,
                found: s.dim(),
            });
        }
        if !s.is_finite() {
            return Err(CoreError::NonFinite { index });
        }
        g.accumulate(s);
    }
    g.mirror_upper();
    Ok(g)
}

pub fn merge_gram(p: &GramPartial, q: &GramPartial) -> Result<GramPartial> {
    if p.dim != q.dim || p.a.len() != q.a.len() || p.b.len() != q.b.len() {
        return Err(CoreError::PartialDimension {
            left: p.dim,
            right: q.dim,
        });
    }
    Ok(GramPartial {
        dim: p.dim,
        a: p.a.iter().zip(&q.a).map(|(x, y)| x + y).collect(),
        b: p.b.iter().zip(&q.b).map(|(x, y)| x + y).collect(),
        n: p.n + q.n,
        sum_yy: p.sum_yy + q.sum_yy,
    })
}
