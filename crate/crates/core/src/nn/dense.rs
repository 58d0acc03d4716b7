//! Fully connected layer `y = xW + b`.

use alloc::format;

use rand::Rng;

use crate::nn::{xavier_uniform, Param};
use crate::tensor::Tensor2;

#[derive(Debug, Clone)]
pub struct Dense {
    pub w: Param,
    pub b: Param,
    x_cache: Option<Tensor2>,
}

impl Dense {
    pub fn new(name: &str, input: usize, output: usize, rng: &mut impl Rng) -> Dense {
        Dense {
            w: Param::new(
                format!("{name}.w"),
                xavier_uniform(input, output, rng),
                true,
            ),
            b: Param::new(format!("{name}.b"), Tensor2::zeros(1, output), false),
            x_cache: None,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.value.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.w.value.cols()
    }

    pub fn forward(&mut self, x: &Tensor2) -> Tensor2 {
        assert_eq!(
            x.cols(),
            self.input_dim(),
            "dense '{}' input shape mismatch: {}x{} vs weights {}x{}",
            self.w.name,
            x.rows(),
            x.cols(),
            self.w.value.rows(),
            self.w.value.cols()
        );
        let mut y = x.matmul(&self.w.value);
        let bias = self.b.value.row(0);
        for r in 0..y.rows() {
            for (v, b) in y.row_mut(r).iter_mut().zip(bias.iter()) {
                *v += b;
            }
        }
        self.x_cache = Some(x.clone());
        y
    }

    /// Accumulates `dW`, `db` and returns `dx`.
    pub fn backward(&mut self, dy: &Tensor2) -> Tensor2 {
        let x = self
            .x_cache
            .as_ref()
            .expect("dense backward called before forward");
        self.w.grad.add_assign(&x.matmul_tn(dy));
        for r in 0..dy.rows() {
            for (g, d) in self.b.grad.row_mut(0).iter_mut().zip(dy.row(r).iter()) {
                *g += d;
            }
        }
        dy.matmul_nt(&self.w.value)
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.w, &mut self.b]
    }
}
