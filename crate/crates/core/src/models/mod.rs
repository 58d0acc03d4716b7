//! The two forecaster architectures, their training regime, and the
//! checkpoint format.

pub mod lstm_model;
pub mod train;
pub mod transformer;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureGroup, MatchupSample};
use crate::nn::{AdamState, Mode, Param};
use crate::scaler::Scaler;
use crate::tensor::Tensor2;

pub use lstm_model::LstmForecaster;
pub use train::{train, EpochRecord, StopReason, TrainConfig, TrainError, TrainingHistory};
pub use transformer::TransformerForecaster;

/// LSTM forecaster layout: LSTM hidden state into a ReLU dense layer and a
/// sigmoid output, dropout after both the recurrent and dense stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmForecasterConfig {
    pub input_dim: usize,
    pub hidden: usize,
    pub dense: usize,
    pub dropout: f64,
}

impl LstmForecasterConfig {
    pub fn with_input_dim(input_dim: usize) -> LstmForecasterConfig {
        LstmForecasterConfig {
            input_dim,
            hidden: 32,
            dense: 16,
            dropout: 0.5,
        }
    }
}

/// Transformer forecaster layout: per-token input projection, optional
/// learned positional embeddings for the two positions, one encoder block,
/// flatten, then a dense head (`dense1 → dense2 → 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformerForecasterConfig {
    pub input_dim: usize,
    pub model_dim: usize,
    pub heads: usize,
    pub ffn_dim: usize,
    pub dense1: usize,
    pub dense2: usize,
    pub dropout: f64,
    pub positional_embeddings: bool,
}

impl TransformerForecasterConfig {
    pub fn with_input_dim(input_dim: usize) -> TransformerForecasterConfig {
        TransformerForecasterConfig {
            input_dim,
            model_dim: 64,
            heads: 2,
            ffn_dim: 64,
            dense1: 64,
            dense2: 16,
            dropout: 0.5,
            positional_embeddings: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArchConfig {
    Lstm(LstmForecasterConfig),
    Transformer(TransformerForecasterConfig),
}

impl ArchConfig {
    pub fn input_dim(&self) -> usize {
        match self {
            ArchConfig::Lstm(c) => c.input_dim,
            ArchConfig::Transformer(c) => c.input_dim,
        }
    }

    pub fn dropout(&self) -> f64 {
        match self {
            ArchConfig::Lstm(c) => c.dropout,
            ArchConfig::Transformer(c) => c.dropout,
        }
    }

    pub fn set_dropout(&mut self, rate: f64) {
        match self {
            ArchConfig::Lstm(c) => c.dropout = rate,
            ArchConfig::Transformer(c) => c.dropout = rate,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ArchConfig::Lstm(_) => "lstm",
            ArchConfig::Transformer(_) => "transformer",
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::InvalidConfig(String::from(msg)));
        match self {
            ArchConfig::Lstm(c) => {
                if c.input_dim == 0 || c.hidden == 0 || c.dense == 0 {
                    return bad("lstm layer sizes must be positive");
                }
                if !(0.0..1.0).contains(&c.dropout) {
                    return bad("dropout must lie in [0, 1)");
                }
            }
            ArchConfig::Transformer(c) => {
                if c.input_dim == 0
                    || c.model_dim == 0
                    || c.ffn_dim == 0
                    || c.dense1 == 0
                    || c.dense2 == 0
                {
                    return bad("transformer layer sizes must be positive");
                }
                if c.heads == 0 || c.model_dim % c.heads != 0 {
                    return Err(ModelError::InvalidConfig(alloc::format!(
                        "model dim {} not divisible by {} heads",
                        c.model_dim,
                        c.heads
                    )));
                }
                if !(0.0..1.0).contains(&c.dropout) {
                    return bad("dropout must lie in [0, 1)");
                }
            }
        }
        Ok(())
    }

    /// Closed-form parameter count implied by the configuration.
    pub fn param_count(&self) -> usize {
        match self {
            ArchConfig::Lstm(c) => {
                let (d, h) = (c.input_dim, c.hidden);
                4 * (d * h + h * h + h) + (h * c.dense + c.dense) + (c.dense + 1)
            }
            ArchConfig::Transformer(c) => {
                let (d, m, f) = (c.input_dim, c.model_dim, c.ffn_dim);
                let projections = d * m + m;
                let positional = if c.positional_embeddings { 2 * m } else { 0 };
                let attention = 4 * (m * m + m);
                let norms = 2 * (2 * m);
                let ffn = (m * f + f) + (f * m + m);
                let head = (2 * m * c.dense1 + c.dense1)
                    + (c.dense1 * c.dense2 + c.dense2)
                    + (c.dense2 + 1);
                projections + positional + attention + norms + ffn + head
            }
        }
    }

    /// Builds the model with Xavier-initialized weights from a seeded RNG;
    /// same seed, same initial parameters.
    pub fn build(&self, seed: u64) -> Result<Forecaster, ModelError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match self {
            ArchConfig::Lstm(c) => {
                Forecaster::Lstm(Box::new(LstmForecaster::new(c.clone(), &mut rng)))
            }
            ArchConfig::Transformer(c) => {
                Forecaster::Transformer(Box::new(TransformerForecaster::new(c.clone(), &mut rng)))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    InvalidConfig(String),
    DimMismatch {
        expected: usize,
        got: usize,
    },
    MissingParam(String),
    ParamShape {
        name: String,
        expected: (usize, usize),
        got: (usize, usize),
    },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidConfig(msg) => write!(f, "invalid model config: {msg}"),
            ModelError::DimMismatch { expected, got } => {
                write!(
                    f,
                    "input dim mismatch: model expects {expected}, sample has {got}"
                )
            }
            ModelError::MissingParam(name) => write!(f, "checkpoint is missing parameter '{name}'"),
            ModelError::ParamShape {
                name,
                expected,
                got,
            } => write!(
                f,
                "parameter '{name}' shape mismatch: {}x{} vs {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
        }
    }
}

impl core::error::Error for ModelError {}

/// Either forecaster behind one interface.
#[derive(Debug, Clone)]
pub enum Forecaster {
    Lstm(Box<LstmForecaster>),
    Transformer(Box<TransformerForecaster>),
}

impl Forecaster {
    pub fn forward(&mut self, x: &Tensor2, mode: Mode, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Forecaster::Lstm(m) => m.forward(x, mode, rng),
            Forecaster::Transformer(m) => m.forward(x, mode, rng),
        }
    }

    pub fn backward(&mut self, dprob: f64) {
        match self {
            Forecaster::Lstm(m) => m.backward(dprob),
            Forecaster::Transformer(m) => m.backward(dprob),
        }
    }

    pub fn arch(&self) -> ArchConfig {
        match self {
            Forecaster::Lstm(m) => ArchConfig::Lstm(m.cfg.clone()),
            Forecaster::Transformer(m) => ArchConfig::Transformer(m.cfg.clone()),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.arch().input_dim()
    }

    pub fn params(&self) -> Vec<&Param> {
        match self {
            Forecaster::Lstm(m) => m.params(),
            Forecaster::Transformer(m) => m.params(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        match self {
            Forecaster::Lstm(m) => m.params_mut(),
            Forecaster::Transformer(m) => m.params_mut(),
        }
    }

    pub fn zero_grads(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for p in self.params() {
            out.extend_from_slice(p.value.data());
        }
        out
    }

    pub fn flat_grads(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for p in self.params() {
            out.extend_from_slice(p.grad.data());
        }
        out
    }

    pub fn set_flat_params(&mut self, theta: &[f64]) {
        let mut cursor = 0;
        for p in self.params_mut() {
            let len = p.value.data().len();
            p.value
                .data_mut()
                .copy_from_slice(&theta[cursor..cursor + len]);
            cursor += len;
        }
        assert_eq!(cursor, theta.len(), "flat param length mismatch");
    }

    pub fn named_params(&self) -> Vec<NamedTensor> {
        self.params()
            .iter()
            .map(|p| NamedTensor {
                name: p.name.clone(),
                tensor: p.value.clone(),
            })
            .collect()
    }

    pub fn load_named_params(&mut self, named: &[NamedTensor]) -> Result<(), ModelError> {
        for param in self.params_mut() {
            let source = named
                .iter()
                .find(|t| t.name == param.name)
                .ok_or_else(|| ModelError::MissingParam(param.name.clone()))?;
            if source.tensor.shape() != param.value.shape() {
                return Err(ModelError::ParamShape {
                    name: param.name.clone(),
                    expected: param.value.shape(),
                    got: source.tensor.shape(),
                });
            }
            param.value = source.tensor.clone();
        }
        Ok(())
    }
}

/// A parameter tensor addressed by its layer-qualified name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub tensor: Tensor2,
}

/// Everything needed to reproduce inference: architecture, learned
/// parameters, the training-partition scaler, feature layout, training
/// history, and (optionally) optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub arch: ArchConfig,
    pub feature_groups: Vec<FeatureGroup>,
    pub params: Vec<NamedTensor>,
    pub scaler: Scaler,
    pub history: TrainingHistory,
    pub train_config: TrainConfig,
    pub adam: Option<AdamState>,
}

impl ModelCheckpoint {
    /// Reconstructs the forecaster with the stored parameters.
    pub fn build_model(&self) -> Result<Forecaster, ModelError> {
        let mut model = self.arch.build(0)?;
        model.load_named_params(&self.params)?;
        Ok(model)
    }

    /// Win probabilities for team 1 of each sample. Samples arrive
    /// unscaled; the stored scaler is applied internally and dropout is
    /// disabled. With `symmetric` set, each probability is the
    /// orientation-averaged value from [`ModelCheckpoint::symmetric_predict`].
    pub fn predict_proba(
        &self,
        samples: &[MatchupSample],
        symmetric: bool,
    ) -> Result<Vec<f64>, ModelError> {
        let mut model = self.build_model()?;
        samples
            .iter()
            .map(|s| {
                if symmetric {
                    symmetric_predict_with(&mut model, &self.scaler, s)
                } else {
                    let mut x = s.x.clone();
                    self.apply_scaler(&mut x)?;
                    Ok(eval_forward(&mut model, &x))
                }
            })
            .collect()
    }

    /// Orientation-averaged probability `(p(t1,t2) + 1 − p(t2,t1)) / 2`.
    pub fn symmetric_predict(&self, sample: &MatchupSample) -> Result<f64, ModelError> {
        let mut model = self.build_model()?;
        symmetric_predict_with(&mut model, &self.scaler, sample)
    }

    fn apply_scaler(&self, x: &mut Tensor2) -> Result<(), ModelError> {
        self.scaler
            .apply_matrix(x)
            .map_err(|_| ModelError::DimMismatch {
                expected: self.scaler.dim(),
                got: x.cols(),
            })?;
        if x.cols() != self.arch.input_dim() {
            return Err(ModelError::DimMismatch {
                expected: self.arch.input_dim(),
                got: x.cols(),
            });
        }
        Ok(())
    }
}

fn eval_forward(model: &mut Forecaster, x: &Tensor2) -> f64 {
    // Eval mode never consumes randomness; the RNG is a placeholder.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    model.forward(x, Mode::Eval, &mut rng)
}

fn swap_rows(x: &Tensor2) -> Tensor2 {
    let mut data = Vec::with_capacity(x.data().len());
    data.extend_from_slice(x.row(1));
    data.extend_from_slice(x.row(0));
    Tensor2::from_vec(2, x.cols(), data)
}

/// Computes the symmetric average in a canonical team order (lower id on
/// row 0) so that evaluating the reversed pair returns bit-exactly
/// `1 − p` of the forward pair.
fn symmetric_predict_with(
    model: &mut Forecaster,
    scaler: &Scaler,
    sample: &MatchupSample,
) -> Result<f64, ModelError> {
    let input_dim = model.input_dim();
    if sample.x.cols() != input_dim || scaler.dim() != input_dim {
        return Err(ModelError::DimMismatch {
            expected: input_dim,
            got: sample.x.cols(),
        });
    }
    let canonical_first = sample.meta.t1 <= sample.meta.t2;
    let mut canonical = if canonical_first {
        sample.x.clone()
    } else {
        swap_rows(&sample.x)
    };
    let mut reversed = swap_rows(&canonical);
    scaler
        .apply_matrix(&mut canonical)
        .and_then(|()| scaler.apply_matrix(&mut reversed))
        .map_err(|_| ModelError::DimMismatch {
            expected: scaler.dim(),
            got: sample.x.cols(),
        })?;

    let p_fwd = eval_forward(model, &canonical);
    let p_rev = eval_forward(model, &reversed);
    let averaged = (p_fwd + (1.0 - p_rev)) / 2.0;
    Ok(if canonical_first {
        averaged
    } else {
        1.0 - averaged
    })
}

/// Full-model gradient verification on a fixed sample set with dropout
/// disabled: compares the accumulated analytic gradient of the mean loss
/// against central differences through the whole forward pass.
pub fn grad_check_model(
    model: &Forecaster,
    samples: &[MatchupSample],
    loss: crate::nn::Loss,
    eps: f64,
) -> Result<f64, crate::nn::GradCheckError> {
    let labels: Vec<f64> = samples
        .iter()
        .map(|s| f64::from(s.label.expect("grad check needs labeled samples")))
        .collect();

    let mut probe = model.clone();
    probe.zero_grads();
    for (s, y) in samples.iter().zip(labels.iter()) {
        let p = eval_forward(&mut probe, &s.x);
        probe.backward(loss.grad_one(p, *y, samples.len()));
    }
    let analytic = probe.flat_grads();
    let theta = model.flat_params();

    let mut scratch = model.clone();
    let loss_at = |t: &[f64]| {
        scratch.set_flat_params(t);
        let mut total = 0.0;
        for (s, y) in samples.iter().zip(labels.iter()) {
            let p = eval_forward(&mut scratch, &s.x);
            total += loss.value_one(p, *y);
        }
        total / samples.len() as f64
    };
    crate::nn::grad_check(loss_at, &theta, &analytic, eps)
}
