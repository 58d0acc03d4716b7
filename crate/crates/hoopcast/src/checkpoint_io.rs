//! Checkpoint persistence: self-describing JSON with architecture config,
//! named parameter tensors, scaler, and training history.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hoopcast_core::models::ModelCheckpoint;

pub fn save_checkpoint(path: &Path, checkpoint: &ModelCheckpoint) -> Result<PathBuf> {
    let json = serde_json::to_string_pretty(checkpoint).context("checkpoint: encode")?;
    std::fs::write(path, format!("{json}\n"))
        .with_context(|| format!("checkpoint: cannot write {}", path.display()))?;
    Ok(path.to_path_buf())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelCheckpoint> {
    let content = std::fs::read_to_string(path)
        .with_context(|| format!("checkpoint: cannot read {}", path.display()))?;
    serde_json::from_str(&content)
        .with_context(|| format!("checkpoint: {} is not a valid checkpoint", path.display()))
}
