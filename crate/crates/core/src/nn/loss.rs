//! Training losses over predicted probabilities.
//!
//! Both losses are means over the batch, so their gradients carry the 1/N
//! factor; the backward pass of the network consumes `dL/dp` directly.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::math;

/// Clamp bound keeping `log` finite for saturated predictions.
const BCE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Bce,
    Brier,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::Bce => "bce",
            Loss::Brier => "brier",
        }
    }

    pub fn parse(s: &str) -> Option<Loss> {
        match s {
            "bce" => Some(Loss::Bce),
            "brier" => Some(Loss::Brier),
            _ => None,
        }
    }

    pub fn compute(self, p: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Loss::Bce => bce_loss(p, y),
            Loss::Brier => brier_loss(p, y),
        }
    }

    /// One sample's contribution to the loss sum (divide by N for the mean).
    pub fn value_one(self, p: f64, y: f64) -> f64 {
        match self {
            Loss::Bce => {
                let pc = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
                -(y * math::ln(pc) + (1.0 - y) * math::ln(1.0 - pc))
            }
            Loss::Brier => (p - y) * (p - y),
        }
    }

    /// `∂(mean loss)/∂pᵢ` for one sample in a batch of `n`.
    pub fn grad_one(self, p: f64, y: f64, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Loss::Bce => {
                let pc = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
                (-(y / pc) + (1.0 - y) / (1.0 - pc)) / n
            }
            Loss::Brier => 2.0 * (p - y) / n,
        }
    }

    /// Loss of a constant 0.5 prediction against balanced labels — the
    /// no-signal floor (ln 2 for BCE, 0.25 for Brier).
    pub fn no_signal_floor(self) -> f64 {
        match self {
            Loss::Bce => core::f64::consts::LN_2,
            Loss::Brier => 0.25,
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mean binary cross-entropy and its gradient wrt each probability.
/// Probabilities are clamped to `[ε, 1−ε]` before the logs.
pub fn bce_loss(p: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    mean_loss(Loss::Bce, p, y)
}

/// Mean squared distance between probabilities and outcomes, with
/// gradient `2(pᵢ − yᵢ)/N`.
pub fn brier_loss(p: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    mean_loss(Loss::Brier, p, y)
}

fn mean_loss(loss: Loss, p: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    assert_eq!(
        p.len(),
        y.len(),
        "{loss}: {} probs vs {} labels",
        p.len(),
        y.len()
    );
    let n = p.len();
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(n);
    for (pi, yi) in p.iter().zip(y.iter()) {
        total += loss.value_one(*pi, *yi);
        grad.push(loss.grad_one(*pi, *yi, n));
    }
    (total / n as f64, grad)
}
