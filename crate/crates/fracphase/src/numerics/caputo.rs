//! Numerical Caputo fractional derivative of order α ∈ (0,1), used by the
//! verification checks (fractional Kolmogorov equations).
//!
//! Product-trapezoidal (L1) quadrature: approximate f′ by forward
//! differences on each cell and integrate the kernel (t−τ)^{−α} exactly:
//!
//!   D^α f(t) ≈ (1/Γ(2−α)) Σ_j (f_{j+1}−f_j)/h · [(t−τ_j)^{1−α} − (t−τ_{j+1})^{1−α}]
//!
//! Error is O(h^{2−α}) on smooth inputs.

use nalgebra::DMatrix;

use super::gamma::gamma;
use crate::error::{Error, Result};

const MIN_GRID: usize = 16;

/// Caputo derivative of order `alpha` at `t` from samples of f on the
/// uniform grid τ_j = j·t/(n−1), j = 0..n−1.
pub fn caputo_numeric(samples: &[f64], alpha: f64, t: f64) -> Result<f64> {
    let w = l1_weights(samples.len(), alpha, t)?;
    Ok(w
        .iter()
        .enumerate()
        .map(|(j, wj)| wj * (samples[j + 1] - samples[j]))
        .sum())
}

/// Entrywise Caputo derivative of a matrix-valued function sampled on the
/// same uniform grid.
pub fn caputo_numeric_matrix(samples: &[DMatrix<f64>], alpha: f64, t: f64) -> Result<DMatrix<f64>> {
    let w = l1_weights(samples.len(), alpha, t)?;
    let (r, c) = samples[0].shape();
    let mut acc = DMatrix::<f64>::zeros(r, c);
    for (j, wj) in w.iter().enumerate() {
        acc += (&samples[j + 1] - &samples[j]) * *wj;
    }
    Ok(acc)
}

/// Weight for the forward difference on cell j; includes the 1/h and
/// 1/Γ(2−α) factors so the derivative is Σ w_j (f_{j+1} − f_j).
fn l1_weights(n: usize, alpha: f64, t: f64) -> Result<Vec<f64>> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "caputo_numeric requires alpha in (0,1), got {alpha}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("caputo_numeric requires t > 0, got {t}")));
    }
    if n < MIN_GRID {
        return Err(Error::Domain(format!(
            "grid too coarse: {n} samples, need at least {MIN_GRID}"
        )));
    }
    let h = t / (n - 1) as f64;
    let c = 1.0 / (gamma(2.0 - alpha)? * h);
    let e = 1.0 - alpha;
    Ok((0..n - 1)
        .map(|j| {
            let a = t - j as f64 * h;
            let b = t - (j + 1) as f64 * h;
            c * (a.powf(e) - b.max(0.0).powf(e))
        })
        .collect())
}
