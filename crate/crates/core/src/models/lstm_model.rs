//! LSTM forecaster: LSTM → dropout → dense(ReLU) → dropout → sigmoid.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::models::LstmForecasterConfig;
use crate::nn::activation::{relu_backward, relu_forward, sigmoid, sigmoid_derivative};
use crate::nn::{Dense, Dropout, LstmCell, Mode, Param};
use crate::tensor::Tensor2;

#[derive(Debug, Clone)]
pub struct LstmForecaster {
    pub cfg: LstmForecasterConfig,
    lstm: LstmCell,
    drop_hidden: Dropout,
    dense: Dense,
    drop_dense: Dropout,
    out: Dense,
    dense_pre: Option<Tensor2>,
    prob: f64,
}

impl LstmForecaster {
    pub fn new(cfg: LstmForecasterConfig, rng: &mut impl Rng) -> LstmForecaster {
        let lstm = LstmCell::new("lstm", cfg.input_dim, cfg.hidden, rng);
        let dense = Dense::new("dense", cfg.hidden, cfg.dense, rng);
        let out = Dense::new("out", cfg.dense, 1, rng);
        LstmForecaster {
            drop_hidden: Dropout::new(cfg.dropout),
            drop_dense: Dropout::new(cfg.dropout),
            cfg,
            lstm,
            dense,
            out,
            dense_pre: None,
            prob: 0.5,
        }
    }

    /// Win probability for the team on row 0 of `x`.
    pub fn forward(&mut self, x: &Tensor2, mode: Mode, rng: &mut ChaCha8Rng) -> f64 {
        let h = self.lstm.forward(x);
        let h = self.drop_hidden.forward(&h, mode, rng);
        let z = self.dense.forward(&h);
        let a = relu_forward(&z);
        self.dense_pre = Some(z);
        let a = self.drop_dense.forward(&a, mode, rng);
        let logit = self.out.forward(&a);
        self.prob = sigmoid(logit.get(0, 0));
        self.prob
    }

    /// Accumulates gradients given `dL/dp` for the last forward pass.
    pub fn backward(&mut self, dprob: f64) {
        let dlogit = dprob * sigmoid_derivative(self.prob);
        let da = self
            .out
            .backward(&Tensor2::from_vec(1, 1, alloc::vec![dlogit]));
        let da = self.drop_dense.backward(&da);
        let dz = relu_backward(
            self.dense_pre
                .as_ref()
                .expect("backward called before forward"),
            &da,
        );
        let dh = self.dense.backward(&dz);
        let dh = self.drop_hidden.backward(&dh);
        let _ = self.lstm.backward(&dh);
    }

    pub fn params(&self) -> Vec<&Param> {
        alloc::vec![
            &self.lstm.w,
            &self.lstm.u,
            &self.lstm.b,
            &self.dense.w,
            &self.dense.b,
            &self.out.w,
            &self.out.b,
        ]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v: Vec<&mut Param> = Vec::with_capacity(7);
        v.extend(self.lstm.params_mut());
        v.extend(self.dense.params_mut());
        v.extend(self.out.params_mut());
        v
    }
}
