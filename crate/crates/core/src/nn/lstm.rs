//! Single-layer LSTM over short row sequences.
//!
//! Gate order in the concatenated `4h` dimension is `[input, forget,
//! candidate, output]`. Hidden and cell states start at zero; only the
//! final hidden state is returned, which is all the forecasters consume.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::math;
use crate::nn::activation::{sigmoid, sigmoid_derivative};
use crate::nn::{xavier_uniform, Param};
use crate::tensor::Tensor2;

#[derive(Debug, Clone)]
struct StepCache {
    x: Tensor2,
    h_prev: Tensor2,
    c_prev: Tensor2,
    i: Tensor2,
    f: Tensor2,
    g: Tensor2,
    o: Tensor2,
    tanh_c: Tensor2,
}

#[derive(Debug, Clone)]
pub struct LstmCell {
    /// Input weights, `d × 4h`.
    pub w: Param,
    /// Recurrent weights, `h × 4h`.
    pub u: Param,
    /// Gate biases, `1 × 4h`.
    pub b: Param,
    hidden: usize,
    steps: Vec<StepCache>,
}

impl LstmCell {
    pub fn new(name: &str, input: usize, hidden: usize, rng: &mut impl Rng) -> LstmCell {
        LstmCell {
            w: Param::new(
                format!("{name}.w"),
                xavier_uniform(input, 4 * hidden, rng),
                true,
            ),
            u: Param::new(
                format!("{name}.u"),
                xavier_uniform(hidden, 4 * hidden, rng),
                true,
            ),
            b: Param::new(format!("{name}.b"), Tensor2::zeros(1, 4 * hidden), false),
            hidden,
            steps: Vec::new(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn input_dim(&self) -> usize {
        self.w.value.rows()
    }

    /// Runs the cell over each row of `seq` and returns the last hidden
    /// state (`1 × h`).
    pub fn forward(&mut self, seq: &Tensor2) -> Tensor2 {
        assert_eq!(
            seq.cols(),
            self.input_dim(),
            "lstm '{}' input shape mismatch: {}x{} vs weights {}x{}",
            self.w.name,
            seq.rows(),
            seq.cols(),
            self.w.value.rows(),
            self.w.value.cols()
        );
        self.steps.clear();
        let h_dim = self.hidden;
        let mut h = Tensor2::zeros(1, h_dim);
        let mut c = Tensor2::zeros(1, h_dim);

        for t in 0..seq.rows() {
            let x = Tensor2::from_vec(1, seq.cols(), seq.row(t).to_vec());
            let mut z = x.matmul(&self.w.value);
            z.add_assign(&h.matmul(&self.u.value));
            for (v, b) in z.row_mut(0).iter_mut().zip(self.b.value.row(0).iter()) {
                *v += b;
            }

            let mut i = Tensor2::zeros(1, h_dim);
            let mut f = Tensor2::zeros(1, h_dim);
            let mut g = Tensor2::zeros(1, h_dim);
            let mut o = Tensor2::zeros(1, h_dim);
            for k in 0..h_dim {
                i.set(0, k, sigmoid(z.get(0, k)));
                f.set(0, k, sigmoid(z.get(0, h_dim + k)));
                g.set(0, k, math::tanh(z.get(0, 2 * h_dim + k)));
                o.set(0, k, sigmoid(z.get(0, 3 * h_dim + k)));
            }

            let mut c_new = Tensor2::zeros(1, h_dim);
            for k in 0..h_dim {
                c_new.set(0, k, f.get(0, k) * c.get(0, k) + i.get(0, k) * g.get(0, k));
            }
            let tanh_c = c_new.map(math::tanh);
            let mut h_new = Tensor2::zeros(1, h_dim);
            for k in 0..h_dim {
                h_new.set(0, k, o.get(0, k) * tanh_c.get(0, k));
            }

            self.steps.push(StepCache {
                x,
                h_prev: h,
                c_prev: c,
                i,
                f,
                g,
                o,
                tanh_c,
            });
            h = h_new;
            c = c_new;
        }
        h
    }

    /// Backpropagates from the final hidden state through every step,
    /// accumulating parameter gradients; returns the gradient wrt the
    /// input sequence.
    pub fn backward(&mut self, dh_last: &Tensor2) -> Tensor2 {
        assert!(
            !self.steps.is_empty(),
            "lstm backward called before forward"
        );
        let h_dim = self.hidden;
        let t_len = self.steps.len();
        let mut dx_seq = Tensor2::zeros(t_len, self.input_dim());

        let mut dh = dh_last.clone();
        let mut dc = Tensor2::zeros(1, h_dim);

        for t in (0..t_len).rev() {
            let step = &self.steps[t];
            let mut dz = Tensor2::zeros(1, 4 * h_dim);
            for k in 0..h_dim {
                let o = step.o.get(0, k);
                let tanh_c = step.tanh_c.get(0, k);
                let d_o = dh.get(0, k) * tanh_c;
                let dc_k = dc.get(0, k) + dh.get(0, k) * o * (1.0 - tanh_c * tanh_c);

                let i = step.i.get(0, k);
                let f = step.f.get(0, k);
                let g = step.g.get(0, k);
                let d_i = dc_k * g;
                let d_f = dc_k * step.c_prev.get(0, k);
                let d_g = dc_k * i;

                dz.set(0, k, d_i * sigmoid_derivative(i));
                dz.set(0, h_dim + k, d_f * sigmoid_derivative(f));
                dz.set(0, 2 * h_dim + k, d_g * (1.0 - g * g));
                dz.set(0, 3 * h_dim + k, d_o * sigmoid_derivative(o));

                dc.set(0, k, dc_k * f);
            }

            self.w.grad.add_assign(&step.x.matmul_tn(&dz));
            self.u.grad.add_assign(&step.h_prev.matmul_tn(&dz));
            for (gb, d) in self.b.grad.row_mut(0).iter_mut().zip(dz.row(0).iter()) {
                *gb += d;
            }

            let dx = dz.matmul_nt(&self.w.value);
            dx_seq.row_mut(t).copy_from_slice(dx.row(0));
            dh = dz.matmul_nt(&self.u.value);
        }
        dx_seq
    }

    pub fn params_mut(&mut self) -> [&mut Param; 3] {
        [&mut self.w, &mut self.u, &mut self.b]
    }
}
