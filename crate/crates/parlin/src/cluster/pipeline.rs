use parlin_core::{fit_gradient_descent, merge_gram, solve_normal, EvalReport, GramPartial, ModelCoefficients, TrainConfig, TrainMode};

use super::{ClusterError, Result};
use crate::protocol::Scope;

/// The three reductions a training job needs, whether answered in-process
/// or by a round over all workers.
pub(crate) trait Reducer {
    fn gram(&mut self, scope: Scope) -> Result<GramPartial>;
    fn gradient(&mut self, theta: &ModelCoefficients) -> Result<(Vec<f64>, u64)>;
    fn sse(&mut self, theta: &ModelCoefficients) -> Result<(f64, u64)>;
}

pub(crate) struct Trained {
    pub coefficients: ModelCoefficients,
    pub eval: EvalReport,
    pub ridge_fallback: bool,
}

pub(crate) fn train_and_evaluate<R: Reducer>(reducer: &mut R, cfg: &TrainConfig) -> Result<Trained> {
    let train = reducer.gram(Scope::Train)?;
    let (coefficients, ridge_fallback) = match cfg.mode {
        TrainMode::NormalEquations => {
            let sol = solve_normal(&train, cfg.ridge_epsilon)?;
            if sol.ridge_fallback {
                log::warn!("normal equations singular; solved with ridge lambda {:e}", sol.lambda);
            }
            (sol.coefficients, sol.ridge_fallback)
        }
        TrainMode::GradientDescent => (
            fit_gradient_descent::<ClusterError, _>(&train, cfg, |theta| reducer.gradient(theta))?,
            false,
        ),
    };
    let (sse, n) = reducer.sse(&coefficients)?;
    Ok(Trained {
        eval: EvalReport::from_sse(sse, n)?,
        coefficients,
        ridge_fallback,
    })
}

/// Folds per-rank partials in the given (ascending rank) order.
pub(crate) fn merge_in_order(n_features: usize, partials: &[GramPartial]) -> Result<GramPartial> {
    partials
        .iter()
        .try_fold(GramPartial::zero(n_features), |acc, p| merge_gram(&acc, p))
        .map_err(Into::into)
}
