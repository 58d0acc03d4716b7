//! Core pipeline for forecasting basketball tournament outcomes.
//!
//! Everything numeric lives here: game-row preparation (overtime scaling and
//! perspective symmetrization), the three feature tiers (seeds, Elo ratings,
//! regression-based team quality, box-score season averages), a small
//! from-scratch neural-network stack with hand-derived backward passes (LSTM
//! and Transformer-encoder forecasters), and the evaluation metrics
//! (accuracy, AUC, Brier, ECE, reliability bins, feature ablation).
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the default
//! `std` feature to use it in freestanding contexts. File formats, CSV
//! ingestion, and the CLI live in the companion `hoopcast` crate.
//!
//! All arithmetic is `f64`. Keyed tables use `BTreeMap` so iteration order,
//! and therefore every downstream artifact, is deterministic for a fixed
//! seed.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ablation;
pub mod data;
pub mod elo;
pub mod eval;
pub mod features;
pub mod glm;
pub mod matchups;
pub(crate) mod math;
pub mod models;
pub mod nn;
pub mod prep;
pub mod scaler;
pub mod tensor;

pub use data::{BoxCounts, BoxLine, GameRecord, GameSource, Gender, MatchRow, SeedEntry, TeamId};
pub use elo::{EloConfig, EloTable};
pub use features::{FeatureGroup, FeatureTables, LabeledMatchup, MatchupSample};
pub use glm::QualityTable;
pub use matchups::MatchupId;
pub use models::{
    ArchConfig, Forecaster, LstmForecasterConfig, ModelCheckpoint, TrainConfig, TrainingHistory,
    TransformerForecasterConfig,
};
pub use nn::Loss;
pub use scaler::Scaler;
pub use tensor::Tensor2;
