use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

/// One dataset record: feature vector and delay target in minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub target: f64,
}

impl Sample {
    pub fn new(features: Vec<f64>, target: f64) -> Self {
        Self { features, target }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn is_finite(&self) -> bool {
        self.target.is_finite() && self.features.iter().all(|v| v.is_finite())
    }
}

/// Fitted linear model: `intercept + weights · features`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCoefficients {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl ModelCoefficients {
    pub fn zeros(n_features: usize) -> Self {
        Self {
            intercept: 0.0,
            weights: alloc::vec![0.0; n_features],
        }
    }

    /// Splits an augmented coefficient vector `[intercept, w_1, .., w_d]`.
    pub fn from_theta(theta: &[f64]) -> Self {
        assert!(!theta.is_empty(), "augmented theta needs an intercept slot");
        Self {
            intercept: theta[0],
            weights: theta[1..].to_vec(),
        }
    }

    pub fn to_theta(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.weights.len() + 1);
        theta.push(self.intercept);
        theta.extend_from_slice(&self.weights);
        theta
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }

    /// Largest per-coefficient relative difference, with `1e-300` guarding
    /// exact zeros.
    pub fn max_relative_diff(&self, other: &Self) -> f64 {
        self.to_theta()
            .iter()
            .zip(other.to_theta().iter())
            .map(|(a, b)| {
                let scale = libm::fmax(libm::fabs(*a), libm::fabs(*b));
                if scale == 0.0 {
                    0.0
                } else {
                    libm::fabs(a - b) / libm::fmax(scale, 1e-300)
                }
            })
            .fold(0.0, libm::fmax)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    #[default]
    NormalEquations,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub mode: TrainMode,
    /// Gradient-descent rounds.
    pub iterations: u32,
    /// Step size in standardized feature space.
    pub learning_rate: f64,
    /// Ridge strength as a fraction of the mean Gram diagonal. Zero means
    /// plain least squares.
    pub ridge_epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: TrainMode::NormalEquations,
            iterations: 50,
            learning_rate: 0.1,
            ridge_epsilon: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn gradient_descent(iterations: u32, learning_rate: f64) -> Self {
        Self {
            mode: TrainMode::GradientDescent,
            iterations,
            learning_rate,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge_epsilon >= 0.0 && self.ridge_epsilon.is_finite()) {
            return Err(CoreError::InvalidConfig("ridge_epsilon must be finite and non-negative"));
        }
        if self.mode == TrainMode::GradientDescent {
            if self.iterations == 0 {
                return Err(CoreError::InvalidConfig("iterations must be at least 1"));
            }
            if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
                return Err(CoreError::InvalidConfig("learning_rate must be positive"));
            }
        }
        Ok(())
    }
}
