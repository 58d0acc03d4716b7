//! Run configuration: a flat key-value TOML document, overridable from
//! CLI flags, hashed into every output manifest.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hoopcast_core::data::Gender;
use hoopcast_core::elo::EloConfig;
use hoopcast_core::features::FeatureGroup;
use hoopcast_core::models::{
    ArchConfig, LstmForecasterConfig, TrainConfig, TransformerForecasterConfig,
};
use hoopcast_core::nn::Loss;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderSelection {
    Men,
    Women,
    Both,
}

impl GenderSelection {
    pub fn genders(self) -> Vec<Gender> {
        match self {
            GenderSelection::Men => vec![Gender::Men],
            GenderSelection::Women => vec![Gender::Women],
            GenderSelection::Both => vec![Gender::Men, Gender::Women],
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "men" => Some(GenderSelection::Men),
            "women" => Some(GenderSelection::Women),
            "both" => Some(GenderSelection::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lstm,
    Transformer,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lstm" => Some(ModelKind::Lstm),
            "transformer" => Some(ModelKind::Transformer),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lstm => "lstm",
            ModelKind::Transformer => "transformer",
        }
    }
}

/// Which prepared rows feed model training (feature fitting always uses
/// regular-season rows).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowFilter {
    Tournament,
    Regular,
    Both,
}

impl RowFilter {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tournament" => Some(RowFilter::Tournament),
            "regular" => Some(RowFilter::Regular),
            "both" => Some(RowFilter::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub gender: GenderSelection,
    pub feature_groups: Vec<String>,
    pub model: ModelKind,
    pub loss: Loss,
    /// Seasons before this train; this season's tournament validates.
    pub holdout_season: u16,
    /// Season whose matchups the submission enumerates; defaults to the
    /// season after the holdout.
    pub predict_season: Option<u16>,
    pub seed: u64,
    /// Abort ingest on the first invalid row instead of skipping it.
    pub strict_ingest: bool,
    pub train_rows: RowFilter,
    /// Let past tournament games join the Elo/quality/box-average fits
    /// (feature fitting is regular-season only by default).
    pub features_use_tournament: bool,
    pub elo_k: f64,
    pub elo_base: f64,
    pub elo_scale: f64,
    pub elo_carry_over: bool,
    /// Ridge coefficient for the team-quality fit; a small positive value
    /// keeps disconnected schedule graphs well-posed.
    pub ridge: f64,
    /// Learning rate; when unset the per-model default applies
    /// (1e-3 LSTM, 1e-4 Transformer).
    pub lr: Option<f64>,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub lr_plateau_factor: f64,
    pub lr_plateau_patience: usize,
    pub dropout: f64,
    pub l2: f64,
    pub lstm_hidden: usize,
    pub lstm_dense: usize,
    pub tf_model_dim: usize,
    pub tf_heads: usize,
    pub tf_ffn: usize,
    pub tf_dense1: usize,
    pub tf_dense2: usize,
    pub positional_embeddings: bool,
    /// Average each submission probability with its reversed-orientation
    /// complement.
    pub symmetric_predict: bool,
    pub clamp_submission: bool,
    /// Also export the prepared match rows for inspection.
    pub export_rows: bool,
    /// Emit the per-pair raw feature companion CSV next to the submission.
    pub audit_features: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            gender: GenderSelection::Both,
            feature_groups: FeatureGroup::default_set()
                .iter()
                .map(|g| g.name().to_string())
                .collect(),
            model: ModelKind::Lstm,
            loss: Loss::Bce,
            holdout_season: 2024,
            predict_season: None,
            seed: 0,
            strict_ingest: true,
            train_rows: RowFilter::Tournament,
            features_use_tournament: false,
            elo_k: 100.0,
            elo_base: 1000.0,
            elo_scale: 400.0,
            elo_carry_over: false,
            ridge: 1e-3,
            lr: None,
            batch_size: 32,
            max_epochs: 100,
            patience: 10,
            lr_plateau_factor: 0.5,
            lr_plateau_patience: 5,
            dropout: 0.5,
            l2: 1e-4,
            lstm_hidden: 32,
            lstm_dense: 16,
            tf_model_dim: 64,
            tf_heads: 2,
            tf_ffn: 64,
            tf_dense1: 64,
            tf_dense2: 16,
            positional_embeddings: true,
            symmetric_predict: true,
            clamp_submission: false,
            export_rows: false,
            audit_features: false,
        }
    }
}

impl RunConfig {
    /// Loads a flat TOML document; unknown keys are a schema error.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let content = std::fs::read_to_string(path)
            .with_context(|| format!("config: cannot read {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&content)
            .with_context(|| format!("config: {} does not match the schema", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.groups()?;
        if self.feature_groups.is_empty() {
            bail!("config: feature_groups must not be empty");
        }
        let unique: BTreeSet<&String> = self.feature_groups.iter().collect();
        if unique.len() != self.feature_groups.len() {
            bail!("config: feature_groups contains duplicates");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            bail!("config: dropout must lie in [0, 1)");
        }
        if self.ridge < 0.0 {
            bail!("config: ridge must be non-negative");
        }
        Ok(())
    }

    pub fn groups(&self) -> Result<Vec<FeatureGroup>> {
        self.feature_groups
            .iter()
            .map(|name| FeatureGroup::parse(name).map_err(anyhow::Error::from))
            .collect()
    }

    pub fn predict_season(&self) -> u16 {
        self.predict_season.unwrap_or(self.holdout_season + 1)
    }

    pub fn elo_config(&self) -> EloConfig {
        EloConfig {
            base_rating: self.elo_base,
            k_factor: self.elo_k,
            scale: self.elo_scale,
            logistic_base: 10.0,
            carry_over: self.elo_carry_over,
        }
    }

    pub fn arch_config(&self, input_dim: usize) -> ArchConfig {
        match self.model {
            ModelKind::Lstm => ArchConfig::Lstm(LstmForecasterConfig {
                input_dim,
                hidden: self.lstm_hidden,
                dense: self.lstm_dense,
                dropout: self.dropout,
            }),
            ModelKind::Transformer => ArchConfig::Transformer(TransformerForecasterConfig {
                input_dim,
                model_dim: self.tf_model_dim,
                heads: self.tf_heads,
                ffn_dim: self.tf_ffn,
                dense1: self.tf_dense1,
                dense2: self.tf_dense2,
                dropout: self.dropout,
                positional_embeddings: self.positional_embeddings,
            }),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let default_lr = match self.model {
            ModelKind::Lstm => 1e-3,
            ModelKind::Transformer => 1e-4,
        };
        TrainConfig {
            loss: self.loss,
            lr: self.lr.unwrap_or(default_lr),
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            lr_plateau_factor: self.lr_plateau_factor,
            lr_plateau_patience: self.lr_plateau_patience,
            lr_floor: 1e-6,
            seed: self.seed,
            dropout: self.dropout,
            l2: self.l2,
        }
    }

    /// Hash of the full configuration, stamped into output manifests.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex_digest(canonical.as_bytes())
    }

    /// Hash over only the fields that shape the feature tables, used to
    /// decide whether a cached table file is still valid.
    pub fn features_fingerprint(&self) -> String {
        let relevant = serde_json::json!({
            "data_dir": self.data_dir,
            "gender": self.gender,
            "strict_ingest": self.strict_ingest,
            "features_use_tournament": self.features_use_tournament,
            "elo_k": self.elo_k,
            "elo_base": self.elo_base,
            "elo_scale": self.elo_scale,
            "elo_carry_over": self.elo_carry_over,
            "ridge": self.ridge,
        });
        hex_digest(relevant.to_string().as_bytes())
    }

    /// Tag used in output file names, e.g. `lstm-bce`.
    pub fn variant_tag(&self) -> String {
        format!("{}-{}", self.model.name(), self.loss.name())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance sidecar written next to every command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub features_fingerprint: String,
    pub seed: u64,
    pub outputs: Vec<String>,
}

pub fn write_manifest(cfg: &RunConfig, command: &str, outputs: &[PathBuf]) -> Result<PathBuf> {
    let manifest = Manifest {
        command: command.to_string(),
        config_hash: cfg.config_hash(),
        features_fingerprint: cfg.features_fingerprint(),
        seed: cfg.seed,
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .to_string()
            })
            .collect(),
    };
    let path = cfg.out_dir.join(format!("{command}.manifest.json"));
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, format!("{json}\n"))
        .with_context(|| format!("manifest: cannot write {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let toml_str = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&toml_str).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("bogus_key = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"));
    }

    #[test]
    fn unknown_feature_group_is_rejected() {
        let cfg: RunConfig = toml::from_str("feature_groups = [\"seed\", \"coach\"]\n").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("coach"));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.config_hash(), cfg.config_hash());
        let mut other = cfg.clone();
        other.seed = 1;
        assert_ne!(cfg.config_hash(), other.config_hash());
        // Feature fingerprint ignores model settings…
        let mut model_change = cfg.clone();
        model_change.model = ModelKind::Transformer;
        assert_eq!(
            cfg.features_fingerprint(),
            model_change.features_fingerprint()
        );
        // …but tracks Elo parameters.
        let mut elo_change = cfg.clone();
        elo_change.elo_k = 50.0;
        assert_ne!(
            cfg.features_fingerprint(),
            elo_change.features_fingerprint()
        );
    }

    #[test]
    fn per_model_learning_rate_defaults() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.train_config().lr, 1e-3);
        cfg.model = ModelKind::Transformer;
        assert_eq!(cfg.train_config().lr, 1e-4);
        cfg.lr = Some(0.01);
        assert_eq!(cfg.train_config().lr, 0.01);
    }
}
