//! From-scratch neural-network primitives with hand-derived backward
//! passes.
//!
//! There is no autograd graph: the two forecaster architectures are fixed,
//! layers cache what their backward pass needs, and every gradient is
//! verified against central finite differences (see [`gradcheck`]).
//! Everything runs in `f64`; the models are small enough that precision
//! beats throughput.

pub mod activation;
pub mod adam;
pub mod attention;
pub mod dense;
pub mod dropout;
pub mod gradcheck;
pub mod loss;
pub mod lstm;
pub mod norm;

use alloc::string::String;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::tensor::Tensor2;

pub use activation::{relu_backward, relu_forward, sigmoid, sigmoid_derivative};
pub use adam::AdamState;
pub use attention::MultiHeadAttention;
pub use dense::Dense;
pub use dropout::Dropout;
pub use gradcheck::{grad_check, GradCheckError};
pub use loss::{bce_loss, brier_loss, Loss};
pub use lstm::LstmCell;
pub use norm::LayerNorm;

/// Forward-pass mode; dropout is the only layer that distinguishes them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// One named parameter tensor with its gradient accumulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: Tensor2,
    pub grad: Tensor2,
    /// Whether the L2 penalty applies; weight matrices decay, biases and
    /// norm gains do not.
    pub decay: bool,
}

impl Param {
    pub fn new(name: impl Into<String>, value: Tensor2, decay: bool) -> Param {
        let grad = Tensor2::zeros(value.rows(), value.cols());
        Param {
            name: name.into(),
            value,
            grad,
            decay,
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    pub fn len(&self) -> usize {
        self.value.data().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Glorot/Xavier uniform initialization: `U(−l, l)` with
/// `l = sqrt(6 / (fan_in + fan_out))` for a `fan_in × fan_out` matrix.
pub fn xavier_uniform(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor2 {
    let limit = math::sqrt(6.0 / (rows + cols) as f64);
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-limit..limit))
        .collect();
    Tensor2::from_vec(rows, cols, data)
}
