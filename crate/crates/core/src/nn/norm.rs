//! Per-token layer normalization with learned gain and bias.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::nn::Param;
use crate::tensor::Tensor2;

const VAR_EPS: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct LayerNorm {
    pub gain: Param,
    pub bias: Param,
    cache: Option<NormCache>,
}

#[derive(Debug, Clone)]
struct NormCache {
    normalized: Tensor2,
    /// Per-row `1 / sqrt(var + ε)`.
    inv_std: Vec<f64>,
}

impl LayerNorm {
    pub fn new(name: &str, dim: usize) -> LayerNorm {
        let mut gain = Tensor2::zeros(1, dim);
        gain.fill(1.0);
        LayerNorm {
            gain: Param::new(format!("{name}.gain"), gain, false),
            bias: Param::new(format!("{name}.bias"), Tensor2::zeros(1, dim), false),
            cache: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.gain.value.cols()
    }

    /// Normalizes each row to mean 0 and unit variance (ε inside the root),
    /// then applies the affine transform.
    pub fn forward(&mut self, x: &Tensor2) -> Tensor2 {
        assert_eq!(
            x.cols(),
            self.dim(),
            "layer norm shape mismatch: {}x{} vs dim {}",
            x.rows(),
            x.cols(),
            self.dim()
        );
        let m = x.cols() as f64;
        let mut normalized = Tensor2::zeros(x.rows(), x.cols());
        let mut inv_std = Vec::with_capacity(x.rows());
        let mut y = Tensor2::zeros(x.rows(), x.cols());
        #[allow(clippy::needless_range_loop)]
        for r in 0..x.rows() {
            let row = x.row(r);
            let mean = row.iter().sum::<f64>() / m;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
            let istd = 1.0 / math::sqrt(var + VAR_EPS);
            inv_std.push(istd);
            for c in 0..x.cols() {
                let n = (row[c] - mean) * istd;
                normalized.set(r, c, n);
                y.set(
                    r,
                    c,
                    self.gain.value.get(0, c) * n + self.bias.value.get(0, c),
                );
            }
        }
        self.cache = Some(NormCache {
            normalized,
            inv_std,
        });
        y
    }

    pub fn backward(&mut self, dy: &Tensor2) -> Tensor2 {
        let cache = self
            .cache
            .as_ref()
            .expect("layer norm backward called before forward");
        let m = dy.cols() as f64;
        let mut dx = Tensor2::zeros(dy.rows(), dy.cols());
        for r in 0..dy.rows() {
            let mut mean_dn = 0.0;
            let mut mean_dn_n = 0.0;
            for c in 0..dy.cols() {
                let d = dy.get(r, c);
                let n = cache.normalized.get(r, c);
                self.gain.grad.set(0, c, self.gain.grad.get(0, c) + d * n);
                self.bias.grad.set(0, c, self.bias.grad.get(0, c) + d);
                let dn = d * self.gain.value.get(0, c);
                mean_dn += dn;
                mean_dn_n += dn * n;
            }
            mean_dn /= m;
            mean_dn_n /= m;
            let istd = cache.inv_std[r];
            for c in 0..dy.cols() {
                let dn = dy.get(r, c) * self.gain.value.get(0, c);
                let n = cache.normalized.get(r, c);
                dx.set(r, c, istd * (dn - mean_dn - n * mean_dn_n));
            }
        }
        dx
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.gain, &mut self.bias]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::max_rel_err;
    use alloc::vec;

    #[test]
    fn constant_token_becomes_bias() {
        let mut ln = LayerNorm::new("ln", 4);
        ln.bias.value = Tensor2::from_vec(1, 4, vec![0.5, -0.5, 1.0, 0.0]);
        let x = Tensor2::from_vec(1, 4, vec![3.0, 3.0, 3.0, 3.0]);
        let y = ln.forward(&x);
        // Zero variance collapses the normalized token to zeros.
        for (a, b) in y.row(0).iter().zip(ln.bias.value.row(0).iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_affine_standardizes_each_token() {
        let mut ln = LayerNorm::new("ln", 5);
        let x = Tensor2::from_vec(
            2,
            5,
            (0..10).map(|i| (i as f64).powi(2) * 0.3 - 2.0).collect(),
        );
        let y = ln.forward(&x);
        for r in 0..2 {
            let mean: f64 = y.row(r).iter().sum::<f64>() / 5.0;
            let var: f64 = y
                .row(r)
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / 5.0;
            assert!(mean.abs() < 1e-9);
            assert!((var - 1.0).abs() < 1e-4); // ε inside the root shrinks it slightly
        }
    }

    /// Finite-difference oracle for gain, bias, and input gradients.
    #[test]
    fn gradients_match_central_differences() {
        let x = Tensor2::from_vec(2, 4, (0..8).map(|i| (i as f64 * 1.3).sin() * 2.0).collect());
        let gain0 = Tensor2::from_vec(1, 4, vec![1.2, 0.8, -0.5, 1.0]);
        let bias0 = Tensor2::from_vec(1, 4, vec![0.1, -0.3, 0.0, 0.7]);

        let loss_of = |gain: &Tensor2, bias: &Tensor2, x: &Tensor2| {
            let mut ln = LayerNorm::new("ln", 4);
            ln.gain.value = gain.clone();
            ln.bias.value = bias.clone();
            let y = ln.forward(x);
            y.data().iter().map(|v| v * v).sum::<f64>() / 2.0
        };

        let mut ln = LayerNorm::new("ln", 4);
        ln.gain.value = gain0.clone();
        ln.bias.value = bias0.clone();
        let y = ln.forward(&x);
        let dx = ln.backward(&y);

        let eps = 1e-6;
        let mut analytic: Vec<f64> = ln.gain.grad.data().to_vec();
        analytic.extend_from_slice(ln.bias.grad.data());
        analytic.extend_from_slice(dx.data());
        let mut numeric = Vec::new();
        for idx in 0..4 {
            let mut gp = gain0.clone();
            gp.data_mut()[idx] += eps;
            let mut gm = gain0.clone();
            gm.data_mut()[idx] -= eps;
            numeric.push((loss_of(&gp, &bias0, &x) - loss_of(&gm, &bias0, &x)) / (2.0 * eps));
        }
        for idx in 0..4 {
            let mut bp = bias0.clone();
            bp.data_mut()[idx] += eps;
            let mut bm = bias0.clone();
            bm.data_mut()[idx] -= eps;
            numeric.push((loss_of(&gain0, &bp, &x) - loss_of(&gain0, &bm, &x)) / (2.0 * eps));
        }
        for idx in 0..8 {
            let mut xp = x.clone();
            xp.data_mut()[idx] += eps;
            let mut xm = x.clone();
            xm.data_mut()[idx] -= eps;
            numeric
                .push((loss_of(&gain0, &bias0, &xp) - loss_of(&gain0, &bias0, &xm)) / (2.0 * eps));
        }
        let err = max_rel_err(&analytic, &numeric);
        assert!(err < 1e-5, "max relative error {err}");
    }
}
