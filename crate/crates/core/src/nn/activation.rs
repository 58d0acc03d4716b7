//! Scalar and elementwise activations.

use crate::math;
use crate::tensor::Tensor2;

/// Numerically stable logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    }
}

/// Derivative expressed through the output: `s·(1−s)`.
pub fn sigmoid_derivative(s: f64) -> f64 {
    s * (1.0 - s)
}

/// Elementwise `max(0, x)`.
pub fn relu_forward(x: &Tensor2) -> Tensor2 {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Chain rule through ReLU given the pre-activation input.
pub fn relu_backward(x: &Tensor2, dy: &Tensor2) -> Tensor2 {
    assert_eq!(
        x.shape(),
        dy.shape(),
        "relu backward shape mismatch: {}x{} vs {}x{}",
        x.rows(),
        x.cols(),
        dy.rows(),
        dy.cols()
    );
    let mask = x.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
    dy.hadamard(&mask)
}
