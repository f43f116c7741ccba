use serde::{Deserialize, Serialize};

use crate::{CoreError, ModelCoefficients, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    /// Root mean squared error in minutes.
    pub rmse: f64,
    pub n_test: u64,
    /// Sum of squared errors in minutes².
    pub sse: f64,
}

impl EvalReport {
    /// Builds a report from an already-reduced SSE and count.
    pub fn from_sse(sse: f64, n_test: u64) -> Result<Self> {
        if n_test == 0 {
            return Err(CoreError::Empty);
        }
        if !(sse >= 0.0 && sse.is_finite()) {
            return Err(CoreError::NonFiniteValue(0));
        }
        Ok(Self {
            rmse: libm::sqrt(sse / n_test as f64),
            n_test,
            sse,
        })
    }
}

pub fn predict(theta: &ModelCoefficients, features: &[f64]) -> Result<f64> {
    if features.len() != theta.n_features() {
        return Err(CoreError::DimensionMismatch {
            index: 0,
            expected: theta.n_features(),
            found: features.len(),
        });
    }
    Ok(theta.intercept + theta.weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>())
}

pub fn rmse(predictions: &[f64], observations: &[f64]) -> Result<EvalReport> {
    if predictions.len() != observations.len() {
        return Err(CoreError::LengthMismatch {
            predictions: predictions.len(),
            observations: observations.len(),
        });
    }
    if predictions.is_empty() {
        return Err(CoreError::Empty);
    }
    let mut sse = 0.0;
    for (i, (p, o)) in predictions.iter().zip(observations).enumerate() {
        if !p.is_finite() || !o.is_finite() {
            return Err(CoreError::NonFiniteValue(i));
        }
        sse += (p - o) * (p - o);
    }
    EvalReport::from_sse(sse, predictions.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{compute_gram_partial, solve_normal, Sample};
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_model_predicts_zero() {
        assert_eq!(predict(&ModelCoefficients::zeros(3), &[4.0, -2.0, 9.0]).unwrap(), 0.0);
    }

    #[test]
    fn prediction_arithmetic() {
        let m = ModelCoefficients::from_theta(&[1.0, 2.0]);
        assert_eq!(predict(&m, &[3.0]).unwrap(), 7.0);
        assert!(predict(&m, &[3.0, 1.0]).is_err());
    }

    #[test]
    fn prediction_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let theta: Vec<f64> = (0..9).map(|_| rng.random_range(-5.0..5.0)).collect();
            let x: Vec<f64> = (0..8).map(|_| rng.random_range(-100.0..100.0)).collect();
            let mut naive = theta[0];
            for i in 0..8 {
                naive += theta[i + 1] * x[i];
            }
            let got = predict(&ModelCoefficients::from_theta(&theta), &x).unwrap();
            assert!((got - naive).abs() <= 1e-12 * naive.abs().max(1.0));
        }
    }

    #[test]
    fn perfect_predictions_have_zero_rmse() {
        let r = rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.rmse, 0.0);
        assert_eq!(r.sse, 0.0);
        assert_eq!(r.n_test, 3);
    }

    #[test]
    fn hand_computed_rmse() {
        let r = rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.sse, 25.0);
        assert!((r.rmse - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((r.rmse - 3.53553).abs() < 1e-5);
    }

    #[test]
    fn rmse_input_errors() {
        assert!(matches!(rmse(&[1.0], &[1.0, 2.0]), Err(CoreError::LengthMismatch { .. })));
        assert_eq!(rmse(&[], &[]).unwrap_err(), CoreError::Empty);
        assert_eq!(rmse(&[f64::NAN], &[1.0]).unwrap_err(), CoreError::NonFiniteValue(0));
    }

    fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
        // Box-Muller
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }

    #[test]
    fn well_specified_fit_recovers_noise_level() {
        let sigma = 13.149;
        let mut rng = ChaCha8Rng::seed_from_u64(13149);
        let make = |rng: &mut ChaCha8Rng| {
            let f = vec![rng.random_range(0.0..10.0), rng.random_range(-3.0..3.0)];
            let y = 12.0 + 1.5 * f[0] - 4.0 * f[1] + sigma * standard_normal(rng);
            Sample::new(f, y)
        };
        let train: Vec<Sample> = (0..100_000).map(|_| make(&mut rng)).collect();
        let test: Vec<Sample> = (0..100_000).map(|_| make(&mut rng)).collect();
        let model = solve_normal(&compute_gram_partial(2, &train).unwrap(), 0.0).unwrap().coefficients;
        let preds: Vec<f64> = test.iter().map(|s| predict(&model, &s.features).unwrap()).collect();
        let obs: Vec<f64> = test.iter().map(|s| s.target).collect();
        let r = rmse(&preds, &obs).unwrap();
        assert!((r.rmse - sigma).abs() <= 0.05 * sigma, "rmse {}", r.rmse);
    }
}
