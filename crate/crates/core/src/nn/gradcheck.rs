//! Central-difference gradient verification.

use alloc::vec::Vec;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum GradCheckError {
    /// The loss closure produced a NaN or infinity at some probe point.
    NonFiniteLoss { coordinate: usize },
}

impl fmt::Display for GradCheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradCheckError::NonFiniteLoss { coordinate } => {
                write!(f, "non-finite loss while probing coordinate {coordinate}")
            }
        }
    }
}

impl core::error::Error for GradCheckError {}

/// Relative error used throughout: `|a − n| / max(1, |a|, |n|)`.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let denom = 1.0f64.max(math::abs(analytic)).max(math::abs(numeric));
    math::abs(analytic - numeric) / denom
}

/// Largest pairwise relative error between two gradient vectors.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(
        analytic.len(),
        numeric.len(),
        "gradient length mismatch: {} vs {}",
        analytic.len(),
        numeric.len()
    );
    analytic
        .iter()
        .zip(numeric.iter())
        .map(|(a, n)| rel_err(*a, *n))
        .fold(0.0, f64::max)
}

/// Compares `analytic` against central differences of `loss_at` around
/// `theta`, probing every coordinate; returns the max relative error.
///
/// The closure must be deterministic (dropout off, fixed data); any
/// non-finite loss aborts the check.
pub fn grad_check(
    mut loss_at: impl FnMut(&[f64]) -> f64,
    theta: &[f64],
    analytic: &[f64],
    eps: f64,
) -> Result<f64, GradCheckError> {
    assert_eq!(
        theta.len(),
        analytic.len(),
        "gradient length mismatch: {} vs {}",
        theta.len(),
        analytic.len()
    );
    let mut probe: Vec<f64> = theta.to_vec();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        probe[i] = theta[i] + eps;
        let plus = loss_at(&probe);
        probe[i] = theta[i] - eps;
        let minus = loss_at(&probe);
        probe[i] = theta[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(GradCheckError::NonFiniteLoss { coordinate: i });
        }
        let numeric = (plus - minus) / (2.0 * eps);
        worst = worst.max(rel_err(analytic[i], numeric));
    }
    Ok(worst)
}
