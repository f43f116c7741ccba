use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{CoreError, GramPartial, ModelCoefficients, Result};

/// Ridge strength retried once when the unregularized factorization fails.
pub const RIDGE_FALLBACK_EPSILON: f64 = 1e-8;

// Pivots below this fraction of their original diagonal count as a failed
// factorization (numerically rank deficient).
const PIVOT_RELATIVE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalSolution {
    pub coefficients: ModelCoefficients,
    /// Absolute ridge added to the diagonal.
    pub lambda: f64,
    /// Set when the unregularized system failed and the fallback ridge was used.
    pub ridge_fallback: bool,
}

/// Solves `(A + λI)θ = b` with `λ = ridge_epsilon · trace(A) / dim`.
///
/// With `ridge_epsilon == 0` a failed Cholesky factorization is retried
/// once at [`RIDGE_FALLBACK_EPSILON`].
pub fn solve_normal(g: &GramPartial, ridge_epsilon: f64) -> Result<NormalSolution> {
    if g.n == 0 {
        return Err(CoreError::EmptyPartial);
    }
    if !(ridge_epsilon >= 0.0 && ridge_epsilon.is_finite()) {
        return Err(CoreError::InvalidConfig("ridge_epsilon must be finite and non-negative"));
    }
    let mean_diag = g.trace() / g.dim as f64;
    let lambda = ridge_epsilon * mean_diag;
    if let Some(theta) = cholesky_solve(g, lambda) {
        return Ok(NormalSolution {
            coefficients: ModelCoefficients::from_theta(&theta),
            lambda,
            ridge_fallback: false,
        });
    }
    if ridge_epsilon > 0.0 {
        return Err(CoreError::Singular { dim: g.dim, lambda });
    }
    let lambda = RIDGE_FALLBACK_EPSILON * mean_diag;
    cholesky_solve(g, lambda)
        .map(|theta| NormalSolution {
            coefficients: ModelCoefficients::from_theta(&theta),
            lambda,
            ridge_fallback: true,
        })
        .ok_or(CoreError::Singular { dim: g.dim, lambda })
}

/// `LLᵀ` factorization of the shifted Gram matrix followed by forward and
/// back substitution. `None` on a non-positive or collapsed pivot.
fn cholesky_solve(g: &GramPartial, lambda: f64) -> Option<Vec<f64>> {
    let p = g.dim;
    let mut l = alloc::vec![0.0; p * p];
    for j in 0..p {
        let diag = g.at(j, j) + lambda;
        let mut s = diag;
        for k in 0..j {
            s -= l[j * p + k] * l[j * p + k];
        }
        if !s.is_finite() || s <= 0.0 || s <= PIVOT_RELATIVE_FLOOR * diag {
            return None;
        }
        let ljj = libm::sqrt(s);
        l[j * p + j] = ljj;
        for i in j + 1..p {
            let mut s = g.at(i, j);
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / ljj;
        }
    }

    // L z = b
    let mut z = alloc::vec![0.0; p];
    for i in 0..p {
        let mut s = g.b[i];
        for k in 0..i {
            s -= l[i * p + k] * z[k];
        }
        z[i] = s / l[i * p + i];
    }
    // Lᵀ θ = z
    let mut theta = alloc::vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in i + 1..p {
            s -= l[k * p + i] * theta[k];
        }
        theta[i] = s / l[i * p + i];
    }
    theta.iter().all(|v| v.is_finite()).then_some(theta)
}
