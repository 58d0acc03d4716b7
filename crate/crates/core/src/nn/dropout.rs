//! Inverted dropout: evaluation mode is an exact identity.

use rand::Rng;

use crate::nn::Mode;
use crate::tensor::Tensor2;

#[derive(Debug, Clone)]
pub struct Dropout {
    pub rate: f64,
    mask: Option<Tensor2>,
}

impl Dropout {
    /// `rate` is the drop probability, `0 ≤ rate < 1`.
    pub fn new(rate: f64) -> Dropout {
        assert!(
            (0.0..1.0).contains(&rate),
            "dropout rate {rate} outside [0, 1)"
        );
        Dropout { rate, mask: None }
    }

    /// In training mode each element is zeroed with probability `rate` and
    /// survivors are scaled by `1/(1−rate)`; in eval mode (or at rate 0)
    /// the input passes through untouched.
    pub fn forward(&mut self, x: &Tensor2, mode: Mode, rng: &mut impl Rng) -> Tensor2 {
        if mode == Mode::Eval || self.rate == 0.0 {
            self.mask = None;
            return x.clone();
        }
        let keep_scale = 1.0 / (1.0 - self.rate);
        let mut mask = Tensor2::zeros(x.rows(), x.cols());
        for v in mask.data_mut().iter_mut() {
            if rng.gen::<f64>() >= self.rate {
                *v = keep_scale;
            }
        }
        let y = x.hadamard(&mask);
        self.mask = Some(mask);
        y
    }

    pub fn backward(&mut self, dy: &Tensor2) -> Tensor2 {
        match &self.mask {
            Some(mask) => dy.hadamard(mask),
            None => dy.clone(),
        }
    }
}
