//! Full-batch gradient descent on the squared-error objective.
//!
//! Workers only ever see raw-space coefficients and return raw-space
//! gradient sums. The descent itself runs on standardized features; because
//! `z_j = (x_j - μ_j) / σ_j` is affine, the standardized gradient follows
//! from the raw one as `g_0` and `(g_j - μ_j g_0) / σ_j`, so no worker needs
//! the column statistics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{CoreError, GramPartial, ModelCoefficients, Result, Sample, TrainConfig};

/// `Σ x'·(x'ᵀθ − y)` over `samples`, with the sample count.
pub fn compute_gradient_partial(samples: &[Sample], theta: &ModelCoefficients) -> Result<(Vec<f64>, u64)> {
    let d = theta.n_features();
    let mut grad = alloc::vec![0.0; d + 1];
    for (index, s) in samples.iter().enumerate() {
        if s.dim() != d {
            return Err(CoreError::DimensionMismatch {
                index,
                expected: d,
                found: s.dim(),
            });
        }
        let mut residual = theta.intercept - s.target;
        for (w, x) in theta.weights.iter().zip(&s.features) {
            residual += w * x;
        }
        grad[0] += residual;
        for (g, x) in grad[1..].iter_mut().zip(&s.features) {
            *g += residual * x;
        }
    }
    Ok((grad, samples.len() as u64))
}

/// `θ − lr · grad_sum / n_total`.
///
/// # Panics
/// If `grad_sum` does not have one entry per coefficient or `n_total` is 0.
pub fn gd_step(theta: &ModelCoefficients, grad_sum: &[f64], n_total: u64, lr: f64) -> ModelCoefficients {
    assert_eq!(grad_sum.len(), theta.n_features() + 1, "gradient dimension");
    assert!(n_total >= 1, "gd_step needs at least one sample");
    let scale = lr / n_total as f64;
    let next: Vec<f64> = theta
        .to_theta()
        .iter()
        .zip(grad_sum)
        .map(|(t, g)| t - scale * g)
        .collect();
    ModelCoefficients::from_theta(&next)
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl ColumnStats {
    pub fn new(mean: Vec<f64>, stddev: Vec<f64>) -> Result<Self> {
        if mean.len() != stddev.len() {
            return Err(CoreError::CoefficientDimension {
                expected: mean.len(),
                found: stddev.len(),
            });
        }
        if let Some(column) = stddev.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(CoreError::ConstantColumn { column });
        }
        Ok(Self { mean, stddev })
    }

    /// Moments read off a Gram partial: `Σx_j = A[0][j]`, `Σx_j² = A[j][j]`.
    pub fn from_gram(g: &GramPartial) -> Result<Self> {
        if g.n == 0 {
            return Err(CoreError::EmptyPartial);
        }
        let n = g.n as f64;
        let d = g.n_features();
        let mut mean = Vec::with_capacity(d);
        let mut stddev = Vec::with_capacity(d);
        for j in 1..=d {
            let m = g.at(0, j) / n;
            let second = g.at(j, j) / n;
            let var = second - m * m;
            if var.is_nan() || var <= 1e-12 * second {
                return Err(CoreError::ConstantColumn { column: j - 1 });
            }
            mean.push(m);
            stddev.push(libm::sqrt(var));
        }
        Ok(Self { mean, stddev })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    /// Coefficients on standardized features to coefficients on raw features.
    pub fn to_raw(&self, standardized: &ModelCoefficients) -> ModelCoefficients {
        let mut intercept = standardized.intercept;
        let weights = standardized
            .weights
            .iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(w, (m, s))| {
                intercept -= w * m / s;
                w / s
            })
            .collect();
        ModelCoefficients { intercept, weights }
    }

    pub fn to_standardized(&self, raw: &ModelCoefficients) -> ModelCoefficients {
        let mut intercept = raw.intercept;
        let weights = raw
            .weights
            .iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(w, (m, s))| {
                intercept += w * m;
                w * s
            })
            .collect();
        ModelCoefficients { intercept, weights }
    }

    /// Raw-space gradient sum to the gradient w.r.t. standardized coefficients.
    pub fn standardize_gradient(&self, raw_grad: &[f64]) -> Vec<f64> {
        let g0 = raw_grad[0];
        core::iter::once(g0)
            .chain(
                raw_grad[1..]
                    .iter()
                    .zip(self.mean.iter().zip(&self.stddev))
                    .map(|(g, (m, s))| (g - m * g0) / s),
            )
            .collect()
    }

    pub fn standardize(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

/// Runs `cfg.iterations` descent steps in standardized space, starting from
/// the mean target as intercept and zero weights.
///
/// `train` supplies the column statistics and target mean; `gradient` is
/// asked for the raw-space gradient sum at raw coefficients once per step.
pub fn fit_gradient_descent<E, F>(train: &GramPartial, cfg: &TrainConfig, mut gradient: F) -> core::result::Result<ModelCoefficients, E>
where
    E: From<CoreError>,
    F: FnMut(&ModelCoefficients) -> core::result::Result<(Vec<f64>, u64), E>,
{
    cfg.validate()?;
    let stats = ColumnStats::from_gram(train)?;
    let mut theta = ModelCoefficients::zeros(stats.n_features());
    theta.intercept = train.b[0] / train.n as f64;
    for _ in 0..cfg.iterations {
        let (raw_grad, n) = gradient(&stats.to_raw(&theta))?;
        if n == 0 {
            return Err(CoreError::EmptyPartial.into());
        }
        let grad = stats.standardize_gradient(&raw_grad);
        theta = gd_step(&theta, &grad, n, cfg.learning_rate);
    }
    Ok(stats.to_raw(&theta))
}
