//! Transformer forecaster: input projection, optional learned positional
//! embeddings, one encoder block (multi-head attention and a two-layer
//! feedforward, each with residual add + layer norm), then a flattened
//! dense head ending in a sigmoid.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::models::TransformerForecasterConfig;
use crate::nn::activation::{relu_backward, relu_forward, sigmoid, sigmoid_derivative};
use crate::nn::{xavier_uniform, Dense, Dropout, LayerNorm, Mode, MultiHeadAttention, Param};
use crate::tensor::Tensor2;

/// The two-token sequence length is fixed by the matchup input shape.
const SEQ_LEN: usize = 2;

#[derive(Debug, Clone)]
pub struct TransformerForecaster {
    pub cfg: TransformerForecasterConfig,
    input_proj: Dense,
    pos_emb: Option<Param>,
    attn: MultiHeadAttention,
    norm_attn: LayerNorm,
    ffn1: Dense,
    ffn2: Dense,
    norm_ffn: LayerNorm,
    dense1: Dense,
    drop1: Dropout,
    dense2: Dense,
    drop2: Dropout,
    out: Dense,
    ffn_pre: Option<Tensor2>,
    dense1_pre: Option<Tensor2>,
    dense2_pre: Option<Tensor2>,
    prob: f64,
}

impl TransformerForecaster {
    pub fn new(cfg: TransformerForecasterConfig, rng: &mut impl Rng) -> TransformerForecaster {
        let m = cfg.model_dim;
        let input_proj = Dense::new("input_proj", cfg.input_dim, m, rng);
        let pos_emb = cfg
            .positional_embeddings
            .then(|| Param::new("pos_emb", xavier_uniform(SEQ_LEN, m, rng), false));
        let attn = MultiHeadAttention::new("attn", m, cfg.heads, rng);
        let ffn1 = Dense::new("ffn1", m, cfg.ffn_dim, rng);
        let ffn2 = Dense::new("ffn2", cfg.ffn_dim, m, rng);
        let dense1 = Dense::new("dense1", SEQ_LEN * m, cfg.dense1, rng);
        let dense2 = Dense::new("dense2", cfg.dense1, cfg.dense2, rng);
        let out = Dense::new("out", cfg.dense2, 1, rng);
        TransformerForecaster {
            drop1: Dropout::new(cfg.dropout),
            drop2: Dropout::new(cfg.dropout),
            norm_attn: LayerNorm::new("norm_attn", m),
            norm_ffn: LayerNorm::new("norm_ffn", m),
            cfg,
            input_proj,
            pos_emb,
            attn,
            ffn1,
            ffn2,
            dense1,
            dense2,
            out,
            ffn_pre: None,
            dense1_pre: None,
            dense2_pre: None,
            prob: 0.5,
        }
    }

    /// Win probability for the team on row 0 of `x`.
    pub fn forward(&mut self, x: &Tensor2, mode: Mode, rng: &mut ChaCha8Rng) -> f64 {
        assert_eq!(
            x.rows(),
            SEQ_LEN,
            "transformer input shape mismatch: {}x{} vs {} tokens",
            x.rows(),
            x.cols(),
            SEQ_LEN
        );
        let mut tokens = self.input_proj.forward(x);
        if let Some(pos) = &self.pos_emb {
            tokens.add_assign(&pos.value);
        }

        let attended = self.attn.forward(&tokens);
        let mut res_attn = tokens;
        res_attn.add_assign(&attended);
        let normed_attn = self.norm_attn.forward(&res_attn);

        let ffn_pre = self.ffn1.forward(&normed_attn);
        let ffn_act = relu_forward(&ffn_pre);
        self.ffn_pre = Some(ffn_pre);
        let ffn_out = self.ffn2.forward(&ffn_act);
        let mut res_ffn = normed_attn;
        res_ffn.add_assign(&ffn_out);
        let encoded = self.norm_ffn.forward(&res_ffn);

        // Flatten the 2×m encoding into one row for the dense head.
        let flat = Tensor2::from_vec(1, SEQ_LEN * self.cfg.model_dim, encoded.data().to_vec());

        let z1 = self.dense1.forward(&flat);
        let a1 = relu_forward(&z1);
        self.dense1_pre = Some(z1);
        let a1 = self.drop1.forward(&a1, mode, rng);

        let z2 = self.dense2.forward(&a1);
        let a2 = relu_forward(&z2);
        self.dense2_pre = Some(z2);
        let a2 = self.drop2.forward(&a2, mode, rng);

        let logit = self.out.forward(&a2);
        self.prob = sigmoid(logit.get(0, 0));
        self.prob
    }

    /// Accumulates gradients given `dL/dp` for the last forward pass.
    pub fn backward(&mut self, dprob: f64) {
        let dlogit = dprob * sigmoid_derivative(self.prob);
        let da2 = self
            .out
            .backward(&Tensor2::from_vec(1, 1, alloc::vec![dlogit]));
        let da2 = self.drop2.backward(&da2);
        let dz2 = relu_backward(self.dense2_pre.as_ref().expect("no forward"), &da2);
        let da1 = self.dense2.backward(&dz2);
        let da1 = self.drop1.backward(&da1);
        let dz1 = relu_backward(self.dense1_pre.as_ref().expect("no forward"), &da1);
        let dflat = self.dense1.backward(&dz1);

        let dencoded = Tensor2::from_vec(SEQ_LEN, self.cfg.model_dim, dflat.data().to_vec());
        let dres_ffn = self.norm_ffn.backward(&dencoded);

        // Residual: gradient flows both through the feedforward branch and
        // straight through.
        let dffn_act = self.ffn2.backward(&dres_ffn);
        let dffn_pre = relu_backward(self.ffn_pre.as_ref().expect("no forward"), &dffn_act);
        let mut dnormed_attn = self.ffn1.backward(&dffn_pre);
        dnormed_attn.add_assign(&dres_ffn);

        let dres_attn = self.norm_attn.backward(&dnormed_attn);
        let mut dtokens = self.attn.backward(&dres_attn);
        dtokens.add_assign(&dres_attn);

        if let Some(pos) = &mut self.pos_emb {
            pos.grad.add_assign(&dtokens);
        }
        let _ = self.input_proj.backward(&dtokens);
    }

    pub fn params(&self) -> Vec<&Param> {
        let mut v = alloc::vec![&self.input_proj.w, &self.input_proj.b];
        if let Some(pos) = &self.pos_emb {
            v.push(pos);
        }
        v.extend([
            &self.attn.wq,
            &self.attn.bq,
            &self.attn.wk,
            &self.attn.bk,
            &self.attn.wv,
            &self.attn.bv,
            &self.attn.wo,
            &self.attn.bo,
            &self.norm_attn.gain,
            &self.norm_attn.bias,
            &self.ffn1.w,
            &self.ffn1.b,
            &self.ffn2.w,
            &self.ffn2.b,
            &self.norm_ffn.gain,
            &self.norm_ffn.bias,
            &self.dense1.w,
            &self.dense1.b,
            &self.dense2.w,
            &self.dense2.b,
            &self.out.w,
            &self.out.b,
        ]);
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v: Vec<&mut Param> = Vec::with_capacity(25);
        v.extend(self.input_proj.params_mut());
        if let Some(pos) = &mut self.pos_emb {
            v.push(pos);
        }
        v.extend(self.attn.params_mut());
        v.extend(self.norm_attn.params_mut());
        v.extend(self.ffn1.params_mut());
        v.extend(self.ffn2.params_mut());
        v.extend(self.norm_ffn.params_mut());
        v.extend(self.dense1.params_mut());
        v.extend(self.dense2.params_mut());
        v.extend(self.out.params_mut());
        v
    }
}
