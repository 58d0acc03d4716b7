//! Feature-ablation harness: retrain with one feature group removed and
//! compare discrimination and calibration against the full-feature
//! baseline.
//!
//! Every run shares the baseline's RNG seed so the deltas isolate the
//! feature's contribution rather than initialization or batching noise.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::eval::{auc, brier, EvalError};
use crate::features::{build_samples, FeatureError, FeatureGroup, FeatureTables, LabeledMatchup};
use crate::models::train::fit_forecaster;
use crate::models::{ArchConfig, ModelError, TrainConfig, TrainError};
use crate::scaler::Scaler;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    /// `None` marks the full-feature baseline row.
    pub removed: Option<FeatureGroup>,
    pub auc: f64,
    pub brier: f64,
    /// `auc − baseline auc` (negative when removal hurts ranking).
    pub auc_delta: f64,
    /// `brier − baseline brier` (positive when removal hurts calibration).
    pub brier_delta: f64,
}

#[derive(Debug)]
pub enum AblationError {
    EmptyAfterRemoval(FeatureGroup),
    Feature(FeatureError),
    Train(TrainError),
    Model(ModelError),
    Eval(EvalError),
}

impl fmt::Display for AblationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AblationError::EmptyAfterRemoval(g) => {
                write!(f, "removing '{g}' leaves no features")
            }
            AblationError::Feature(e) => write!(f, "{e}"),
            AblationError::Train(e) => write!(f, "{e}"),
            AblationError::Model(e) => write!(f, "{e}"),
            AblationError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AblationError {}

impl From<FeatureError> for AblationError {
    fn from(e: FeatureError) -> Self {
        AblationError::Feature(e)
    }
}
impl From<TrainError> for AblationError {
    fn from(e: TrainError) -> Self {
        AblationError::Train(e)
    }
}
impl From<ModelError> for AblationError {
    fn from(e: ModelError) -> Self {
        AblationError::Model(e)
    }
}
impl From<EvalError> for AblationError {
    fn from(e: EvalError) -> Self {
        AblationError::Eval(e)
    }
}

fn run_once(
    groups: &[FeatureGroup],
    train_set: &[LabeledMatchup],
    val_set: &[LabeledMatchup],
    tables: &FeatureTables,
    arch: &ArchConfig,
    cfg: &TrainConfig,
) -> Result<(f64, f64), AblationError> {
    let mut train_samples = build_samples(train_set, tables, groups)?;
    let mut val_samples = build_samples(val_set, tables, groups)?;
    let scaler = Scaler::fit(&train_samples)
        .map_err(|_| TrainError::EmptyPartition { partition: "train" })?;
    scaler
        .apply_all(&mut train_samples)
        .and_then(|()| scaler.apply_all(&mut val_samples))
        .expect("samples built with one group list share a width");

    let mut arch = arch.clone();
    let d = crate::features::feature_dim(groups);
    match &mut arch {
        ArchConfig::Lstm(c) => c.input_dim = d,
        ArchConfig::Transformer(c) => c.input_dim = d,
    }
    let checkpoint = fit_forecaster(
        &arch,
        &train_samples,
        &val_samples,
        scaler,
        groups.to_vec(),
        cfg,
    )?;

    // The checkpoint scales internally, so evaluate from unscaled inputs.
    let raw_val = build_samples(val_set, tables, groups)?;
    let probs = checkpoint.predict_proba(&raw_val, false)?;
    let labels: Vec<u8> = val_set.iter().map(|m| m.label).collect();
    Ok((auc(&probs, &labels)?, brier(&probs, &labels)?))
}

/// Trains the baseline plus one run per removed group (identical seeds)
/// and reports metric deltas against the baseline.
pub fn run_ablation(
    groups: &[FeatureGroup],
    train_set: &[LabeledMatchup],
    val_set: &[LabeledMatchup],
    tables: &FeatureTables,
    arch: &ArchConfig,
    cfg: &TrainConfig,
) -> Result<Vec<AblationResult>, AblationError> {
    let (base_auc, base_brier) = run_once(groups, train_set, val_set, tables, arch, cfg)?;
    let mut results = alloc::vec![AblationResult {
        removed: None,
        auc: base_auc,
        brier: base_brier,
        auc_delta: 0.0,
        brier_delta: 0.0,
    }];

    for group in groups {
        let remaining: Vec<FeatureGroup> = groups.iter().filter(|g| *g != group).copied().collect();
        if remaining.is_empty() {
            return Err(AblationError::EmptyAfterRemoval(*group));
        }
        let (run_auc, run_brier) = run_once(&remaining, train_set, val_set, tables, arch, cfg)?;
        results.push(AblationResult {
            removed: Some(*group),
            auc: run_auc,
            brier: run_brier,
            auc_delta: run_auc - base_auc,
            brier_delta: run_brier - base_brier,
        });
    }
    Ok(results)
}
