//! Minibatch Adam training with early stopping, best-epoch checkpointing,
//! and learning-rate reduction on plateau.
//!
//! The monitored quantity is the training loss function evaluated on the
//! validation set. Shuffling and dropout masks come from one ChaCha stream
//! seeded by the config, so a fixed seed reproduces the parameter
//! trajectory exactly.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureGroup, MatchupSample};
use crate::models::{ArchConfig, Forecaster, ModelCheckpoint, ModelError};
use crate::nn::{AdamState, Loss, Mode};
use crate::scaler::Scaler;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: Loss,
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Early-stop after this many epochs without validation improvement.
    pub patience: usize,
    pub lr_plateau_factor: f64,
    /// Halve the learning rate after this many stagnant epochs.
    pub lr_plateau_patience: usize,
    pub lr_floor: f64,
    pub seed: u64,
    pub dropout: f64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: Loss::Bce,
            lr: 1e-3,
            batch_size: 32,
            max_epochs: 100,
            patience: 10,
            lr_plateau_factor: 0.5,
            lr_plateau_patience: 5,
            lr_floor: 1e-6,
            seed: 0,
            dropout: 0.5,
            l2: 1e-4,
        }
    }
}

impl TrainConfig {
    /// Per-architecture defaults; they differ only in learning rate
    /// (1e−3 for the LSTM, 1e−4 for the Transformer).
    pub fn default_for(arch: &ArchConfig) -> TrainConfig {
        let mut cfg = TrainConfig::default();
        if matches!(arch, ArchConfig::Transformer(_)) {
            cfg.lr = 1e-4;
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &'static str| Err(TrainError::InvalidConfig(m));
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.max_epochs == 0 {
            return bad("max epochs must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if self.lr_plateau_patience == 0 {
            return bad("plateau patience must be at least 1");
        }
        if !(0.0..1.0).contains(&self.lr_plateau_factor) {
            return bad("plateau factor must lie in (0, 1)");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.l2 < 0.0 {
            return bad("l2 must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    InvalidConfig(&'static str),
    EmptyPartition {
        partition: &'static str,
    },
    UnlabeledSample {
        partition: &'static str,
        index: usize,
    },
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
    },
    Model(ModelError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::InvalidConfig(msg) => write!(f, "invalid training config: {msg}"),
            TrainError::EmptyPartition { partition } => {
                write!(f, "{partition} partition is empty")
            }
            TrainError::UnlabeledSample { partition, index } => {
                write!(f, "{partition} sample {index} has no label")
            }
            TrainError::NonFiniteLoss { epoch, batch } => {
                write!(f, "non-finite loss at epoch {epoch}, batch {batch}")
            }
            TrainError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EarlyStop,
    MaxEpochs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
    /// Learning rate in effect during this epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based index of the epoch whose weights were kept.
    pub best_epoch: usize,
    pub stop_reason: StopReason,
}

impl TrainingHistory {
    pub fn best_val_loss(&self) -> f64 {
        self.epochs[self.best_epoch - 1].val_loss
    }
}

fn labels_of(samples: &[MatchupSample], partition: &'static str) -> Result<Vec<f64>, TrainError> {
    samples
        .iter()
        .enumerate()
        .map(|(index, s)| {
            s.label
                .map(f64::from)
                .ok_or(TrainError::UnlabeledSample { partition, index })
        })
        .collect()
}

/// Trains in place; on return the model holds the weights of the best
/// validation epoch. Inputs must already be standardized.
pub fn train(
    model: &mut Forecaster,
    train_samples: &[MatchupSample],
    val_samples: &[MatchupSample],
    cfg: &TrainConfig,
) -> Result<TrainingHistory, TrainError> {
    cfg.validate()?;
    if train_samples.is_empty() {
        return Err(TrainError::EmptyPartition { partition: "train" });
    }
    if val_samples.is_empty() {
        return Err(TrainError::EmptyPartition {
            partition: "validation",
        });
    }
    let train_labels = labels_of(train_samples, "train")?;
    let val_labels = labels_of(val_samples, "validation")?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(cfg.lr, &model.params());

    let mut history = TrainingHistory {
        epochs: Vec::new(),
        best_epoch: 0,
        stop_reason: StopReason::MaxEpochs,
    };
    let mut best_loss = f64::INFINITY;
    let mut best_params: Vec<f64> = model.flat_params();
    let mut stagnant_stop = 0usize;
    let mut stagnant_lr = 0usize;

    let mut order: Vec<usize> = (0..train_samples.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        // Fisher-Yates keyed to the config seed.
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }

        let mut loss_sum = 0.0;
        for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
            model.zero_grads();
            let mut batch_sum = 0.0;
            for &sample_idx in batch {
                let sample = &train_samples[sample_idx];
                let y = train_labels[sample_idx];
                let p = model.forward(&sample.x, Mode::Train, &mut rng);
                batch_sum += cfg.loss.value_one(p, y);
                model.backward(cfg.loss.grad_one(p, y, batch.len()));
            }
            if !batch_sum.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                });
            }
            adam.apply(&mut model.params_mut(), cfg.l2);
            loss_sum += batch_sum;
        }
        let train_loss = loss_sum / train_samples.len() as f64;

        let (val_loss, val_accuracy) = validate(model, val_samples, &val_labels, cfg.loss);
        if !val_loss.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch, batch: 0 });
        }

        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
            lr: adam.lr,
        });

        if val_loss < best_loss {
            best_loss = val_loss;
            history.best_epoch = epoch;
            best_params = model.flat_params();
            stagnant_stop = 0;
            stagnant_lr = 0;
        } else {
            stagnant_stop += 1;
            stagnant_lr += 1;
        }

        if stagnant_stop >= cfg.patience {
            history.stop_reason = StopReason::EarlyStop;
            break;
        }
        if stagnant_lr >= cfg.lr_plateau_patience && adam.lr > cfg.lr_floor {
            adam.lr = (adam.lr * cfg.lr_plateau_factor).max(cfg.lr_floor);
            stagnant_lr = 0;
        }
    }

    model.set_flat_params(&best_params);
    Ok(history)
}

fn validate(
    model: &mut Forecaster,
    samples: &[MatchupSample],
    labels: &[f64],
    loss: Loss,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0); // unused in eval mode
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for (s, y) in samples.iter().zip(labels.iter()) {
        let p = model.forward(&s.x, Mode::Eval, &mut rng);
        loss_sum += loss.value_one(p, *y);
        let predicted = if p >= 0.5 { 1.0 } else { 0.0 };
        if predicted == *y {
            correct += 1;
        }
    }
    (
        loss_sum / samples.len() as f64,
        correct as f64 / samples.len() as f64,
    )
}

/// Builds the architecture (with the config's dropout rate and seed),
/// trains it, and packages the result as a checkpoint. Both partitions
/// must already be standardized with `scaler`.
pub fn fit_forecaster(
    arch: &ArchConfig,
    train_samples: &[MatchupSample],
    val_samples: &[MatchupSample],
    scaler: Scaler,
    feature_groups: Vec<FeatureGroup>,
    cfg: &TrainConfig,
) -> Result<ModelCheckpoint, TrainError> {
    let mut arch = arch.clone();
    arch.set_dropout(cfg.dropout);
    let mut model = arch.build(cfg.seed)?;
    let history = train(&mut model, train_samples, val_samples, cfg)?;
    Ok(ModelCheckpoint {
        arch,
        feature_groups,
        params: model.named_params(),
        scaler,
        history,
        train_config: cfg.clone(),
        adam: None,
    })
}
