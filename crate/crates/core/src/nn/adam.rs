//! Bias-corrected Adam with coupled L2 (the penalty joins the gradient
//! before the moment updates).

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::nn::Param;
use crate::tensor::Tensor2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Tensor2>,
    v: Vec<Tensor2>,
}

impl AdamState {
    /// Fresh optimizer state shaped after `params`, with the standard
    /// moment decays (β₁ 0.9, β₂ 0.999, ε 1e−8).
    pub fn new(lr: f64, params: &[&Param]) -> AdamState {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: params
                .iter()
                .map(|p| Tensor2::zeros(p.value.rows(), p.value.cols()))
                .collect(),
            v: params
                .iter()
                .map(|p| Tensor2::zeros(p.value.rows(), p.value.cols()))
                .collect(),
        }
    }

    /// One update over every parameter. `l2` is added to the gradient as
    /// `λ·w` for parameters flagged for decay before the moments move.
    pub fn apply(&mut self, params: &mut [&mut Param], l2: f64) {
        assert_eq!(
            params.len(),
            self.m.len(),
            "adam state tracks {} tensors, got {}",
            self.m.len(),
            params.len()
        );
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - math::powf(self.beta1, f64::from(t));
        let bias2 = 1.0 - math::powf(self.beta2, f64::from(t));

        for (idx, param) in params.iter_mut().enumerate() {
            assert_eq!(
                param.value.shape(),
                self.m[idx].shape(),
                "adam moment shape mismatch for '{}': {}x{} vs {}x{}",
                param.name,
                param.value.rows(),
                param.value.cols(),
                self.m[idx].rows(),
                self.m[idx].cols()
            );
            let decay = if param.decay { l2 } else { 0.0 };
            let m = self.m[idx].data_mut();
            let v = self.v[idx].data_mut();
            let grads = param.grad.data();
            let values = param.value.data_mut();
            for k in 0..values.len() {
                let g = grads[k] + decay * values[k];
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g;
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g * g;
                let m_hat = m[k] / bias1;
                let v_hat = v[k] / bias2;
                values[k] -= self.lr * m_hat / (math::sqrt(v_hat) + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_param(value: f64) -> Param {
        Param::new("w", Tensor2::from_vec(1, 1, alloc::vec![value]), true)
    }

    #[test]
    fn zero_gradient_zero_moments_is_fixed_point() {
        let mut p = single_param(1.5);
        let mut adam = AdamState::new(1e-2, &[&p]);
        adam.apply(&mut [&mut p], 0.0);
        assert_eq!(p.value.get(0, 0), 1.5);
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        for g in [3.0, -0.2, 12.5] {
            let mut p = single_param(0.0);
            p.grad.set(0, 0, g);
            let mut adam = AdamState::new(1e-3, &[&p]);
            adam.apply(&mut [&mut p], 0.0);
            let moved = p.value.get(0, 0);
            // m̂/√v̂ = g/|g| up to ε.
            assert!(
                (moved + 1e-3 * g.signum()).abs() < 1e-9,
                "g={g} moved {moved}"
            );
        }
    }

    /// Independent oracle: a scalar transcription of the Adam recurrence
    /// driven down the quadratic bowl f(w) = w².
    #[test]
    fn quadratic_bowl_converges_and_matches_reference() {
        let lr = 1e-2;
        let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);

        let mut p = single_param(1.0);
        let mut adam = AdamState::new(lr, &[&p]);

        let mut w_ref = 1.0f64;
        let (mut m_ref, mut v_ref) = (0.0f64, 0.0f64);

        for t in 1..=500 {
            p.zero_grad();
            p.grad.set(0, 0, 2.0 * p.value.get(0, 0));
            adam.apply(&mut [&mut p], 0.0);

            let g = 2.0 * w_ref;
            m_ref = beta1 * m_ref + (1.0 - beta1) * g;
            v_ref = beta2 * v_ref + (1.0 - beta2) * g * g;
            let m_hat = m_ref / (1.0 - beta1.powi(t));
            let v_hat = v_ref / (1.0 - beta2.powi(t));
            w_ref -= lr * m_hat / (v_hat.sqrt() + eps);

            assert!(
                (p.value.get(0, 0) - w_ref).abs() < 1e-14,
                "diverged from reference at step {t}"
            );
        }
        assert!(
            p.value.get(0, 0).abs() < 1e-2,
            "final w {}",
            p.value.get(0, 0)
        );
    }

    #[test]
    fn l2_pulls_decaying_weights_toward_zero() {
        let mut p = single_param(2.0);
        let mut adam = AdamState::new(1e-2, &[&p]);
        for _ in 0..200 {
            p.zero_grad(); // no data gradient, only the penalty
            adam.apply(&mut [&mut p], 0.1);
        }
        assert!(p.value.get(0, 0).abs() < 1.9);

        // Biases (decay = false) are untouched by the penalty.
        let mut b = Param::new("b", Tensor2::from_vec(1, 1, alloc::vec![2.0]), false);
        let mut adam_b = AdamState::new(1e-2, &[&b]);
        for _ in 0..200 {
            b.zero_grad();
            adam_b.apply(&mut [&mut b], 0.1);
        }
        assert_eq!(b.value.get(0, 0), 2.0);
    }

    #[test]
    #[should_panic(expected = "adam state tracks")]
    fn mismatched_param_count_panics() {
        let p1 = single_param(0.0);
        let mut adam = AdamState::new(1e-3, &[&p1]);
        let mut a = single_param(0.0);
        let mut b = single_param(0.0);
        adam.apply(&mut [&mut a, &mut b], 0.0);
    }
}
