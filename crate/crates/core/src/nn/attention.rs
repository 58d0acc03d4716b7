//! Multi-head scaled dot-product self-attention for token-pair inputs.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::math;
use crate::nn::{xavier_uniform, Param};
use crate::tensor::Tensor2;

#[derive(Debug, Clone)]
struct AttnCache {
    x: Tensor2,
    q: Tensor2,
    k: Tensor2,
    v: Tensor2,
    /// Per-head softmax weights.
    attn: Vec<Tensor2>,
    concat: Tensor2,
}

#[derive(Debug, Clone)]
pub struct MultiHeadAttention {
    pub wq: Param,
    pub bq: Param,
    pub wk: Param,
    pub bk: Param,
    pub wv: Param,
    pub bv: Param,
    pub wo: Param,
    pub bo: Param,
    heads: usize,
    cache: Option<AttnCache>,
}

impl MultiHeadAttention {
    /// `model_dim` must be divisible by `heads`.
    pub fn new(
        name: &str,
        model_dim: usize,
        heads: usize,
        rng: &mut impl Rng,
    ) -> MultiHeadAttention {
        assert!(
            heads > 0 && model_dim.is_multiple_of(heads),
            "attention '{name}': model dim {model_dim} not divisible by {heads} heads"
        );
        let bias = |n: &str| Param::new(format!("{name}.{n}"), Tensor2::zeros(1, model_dim), false);
        MultiHeadAttention {
            wq: Param::new(
                format!("{name}.wq"),
                xavier_uniform(model_dim, model_dim, rng),
                true,
            ),
            bq: bias("bq"),
            wk: Param::new(
                format!("{name}.wk"),
                xavier_uniform(model_dim, model_dim, rng),
                true,
            ),
            bk: bias("bk"),
            wv: Param::new(
                format!("{name}.wv"),
                xavier_uniform(model_dim, model_dim, rng),
                true,
            ),
            bv: bias("bv"),
            wo: Param::new(
                format!("{name}.wo"),
                xavier_uniform(model_dim, model_dim, rng),
                true,
            ),
            bo: bias("bo"),
            heads,
            cache: None,
        }
    }

    pub fn model_dim(&self) -> usize {
        self.wq.value.rows()
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    /// Softmax weights from the most recent forward pass, one `t×t` matrix
    /// per head.
    pub fn last_attention(&self) -> Option<&[Tensor2]> {
        self.cache.as_ref().map(|c| c.attn.as_slice())
    }

    fn project(x: &Tensor2, w: &Param, b: &Param) -> Tensor2 {
        let mut out = x.matmul(&w.value);
        for r in 0..out.rows() {
            for (v, bias) in out.row_mut(r).iter_mut().zip(b.value.row(0).iter()) {
                *v += bias;
            }
        }
        out
    }

    fn head_slice(full: &Tensor2, head: usize, dk: usize) -> Tensor2 {
        let mut out = Tensor2::zeros(full.rows(), dk);
        for r in 0..full.rows() {
            out.row_mut(r)
                .copy_from_slice(&full.row(r)[head * dk..(head + 1) * dk]);
        }
        out
    }

    pub fn forward(&mut self, x: &Tensor2) -> Tensor2 {
        let m = self.model_dim();
        assert_eq!(
            x.cols(),
            m,
            "attention input shape mismatch: {}x{} vs model dim {}",
            x.rows(),
            x.cols(),
            m
        );
        let dk = m / self.heads;
        let scale = 1.0 / math::sqrt(dk as f64);

        let q = Self::project(x, &self.wq, &self.bq);
        let k = Self::project(x, &self.wk, &self.bk);
        let v = Self::project(x, &self.wv, &self.bv);

        let mut concat = Tensor2::zeros(x.rows(), m);
        let mut attn = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let qh = Self::head_slice(&q, h, dk);
            let kh = Self::head_slice(&k, h, dk);
            let vh = Self::head_slice(&v, h, dk);

            let mut scores = qh.matmul_nt(&kh);
            scores.scale(scale);
            let weights = softmax_rows(&scores);
            let oh = weights.matmul(&vh);
            for r in 0..x.rows() {
                concat.row_mut(r)[h * dk..(h + 1) * dk].copy_from_slice(oh.row(r));
            }
            attn.push(weights);
        }

        let y = Self::project(&concat, &self.wo, &self.bo);
        self.cache = Some(AttnCache {
            x: x.clone(),
            q,
            k,
            v,
            attn,
            concat,
        });
        y
    }

    pub fn backward(&mut self, dy: &Tensor2) -> Tensor2 {
        let cache = self
            .cache
            .as_ref()
            .expect("attention backward called before forward");
        let m = self.model_dim();
        let dk = m / self.heads;
        let scale = 1.0 / math::sqrt(dk as f64);
        let rows = cache.x.rows();

        // Output projection.
        self.wo.grad.add_assign(&cache.concat.matmul_tn(dy));
        add_col_sums(&mut self.bo.grad, dy);
        let dconcat = dy.matmul_nt(&self.wo.value);

        let mut dq = Tensor2::zeros(rows, m);
        let mut dk_full = Tensor2::zeros(rows, m);
        let mut dv = Tensor2::zeros(rows, m);
        for h in 0..self.heads {
            let qh = Self::head_slice(&cache.q, h, dk);
            let kh = Self::head_slice(&cache.k, h, dk);
            let vh = Self::head_slice(&cache.v, h, dk);
            let weights = &cache.attn[h];
            let doh = Self::head_slice(&dconcat, h, dk);

            let dvh = weights.matmul_tn(&doh);
            let dweights = doh.matmul_nt(&vh);
            let mut dscores = softmax_rows_backward(weights, &dweights);
            dscores.scale(scale);

            let dqh = dscores.matmul(&kh);
            let dkh = dscores.matmul_tn(&qh);

            for r in 0..rows {
                dq.row_mut(r)[h * dk..(h + 1) * dk].copy_from_slice(dqh.row(r));
                dk_full.row_mut(r)[h * dk..(h + 1) * dk].copy_from_slice(dkh.row(r));
                dv.row_mut(r)[h * dk..(h + 1) * dk].copy_from_slice(dvh.row(r));
            }
        }

        self.wq.grad.add_assign(&cache.x.matmul_tn(&dq));
        add_col_sums(&mut self.bq.grad, &dq);
        self.wk.grad.add_assign(&cache.x.matmul_tn(&dk_full));
        add_col_sums(&mut self.bk.grad, &dk_full);
        self.wv.grad.add_assign(&cache.x.matmul_tn(&dv));
        add_col_sums(&mut self.bv.grad, &dv);

        let mut dx = dq.matmul_nt(&self.wq.value);
        dx.add_assign(&dk_full.matmul_nt(&self.wk.value));
        dx.add_assign(&dv.matmul_nt(&self.wv.value));
        dx
    }

    pub fn params_mut(&mut self) -> [&mut Param; 8] {
        [
            &mut self.wq,
            &mut self.bq,
            &mut self.wk,
            &mut self.bk,
            &mut self.wv,
            &mut self.bv,
            &mut self.wo,
            &mut self.bo,
        ]
    }
}

fn add_col_sums(grad: &mut Tensor2, dy: &Tensor2) {
    for r in 0..dy.rows() {
        for (g, d) in grad.row_mut(0).iter_mut().zip(dy.row(r).iter()) {
            *g += d;
        }
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(x: &Tensor2) -> Tensor2 {
    let mut out = Tensor2::zeros(x.rows(), x.cols());
    for r in 0..x.rows() {
        let row = x.row(r);
        let max = row
            .iter()
            .fold(f64::NEG_INFINITY, |a, b| if *b > a { *b } else { a });
        let mut sum = 0.0;
        let out_row = out.row_mut(r);
        for (o, v) in out_row.iter_mut().zip(row.iter()) {
            *o = math::exp(v - max);
            sum += *o;
        }
        for o in out_row.iter_mut() {
            *o /= sum;
        }
    }
    out
}

/// Row-wise softmax Jacobian product: `ds_j = a_j (da_j − Σ_k da_k a_k)`.
fn softmax_rows_backward(a: &Tensor2, da: &Tensor2) -> Tensor2 {
    let mut out = Tensor2::zeros(a.rows(), a.cols());
    for r in 0..a.rows() {
        let dot: f64 = a
            .row(r)
            .iter()
            .zip(da.row(r).iter())
            .map(|(x, y)| x * y)
            .sum();
        for c in 0..a.cols() {
            out.set(r, c, a.get(r, c) * (da.get(r, c) - dot));
        }
    }
    out
}
