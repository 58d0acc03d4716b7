//! CSV and JSON emitters for training curves, evaluation reports,
//! reliability diagrams, ablation tables, and prediction histograms.
//!
//! Numeric cells use shortest round-trip formatting, so identical inputs
//! always produce byte-identical files.

use std::io::Write;
use std::path::{Path, PathBuf};

use hoopcast_core::ablation::AblationResult;
use hoopcast_core::eval::{EvalReport, ReliabilityBin};
use hoopcast_core::models::TrainingHistory;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot encode {path}: {source}")]
    Encode {
        path: PathBuf,
        source: serde_json::Error,
    },
}

fn write_file(path: &Path, content: &str) -> Result<(), ReportError> {
    let mut file = std::fs::File::create(path).map_err(|source| ReportError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(content.as_bytes())
        .map_err(|source| ReportError::Write {
            path: path.to_path_buf(),
            source,
        })
}

/// One row per completed epoch: `epoch,train_loss,val_loss,val_acc,lr`.
pub fn write_history_csv(path: &Path, history: &TrainingHistory) -> Result<(), ReportError> {
    let mut out = String::from("epoch,train_loss,val_loss,val_acc,lr\n");
    for e in &history.epochs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.epoch, e.train_loss, e.val_loss, e.val_accuracy, e.lr
        ));
    }
    write_file(path, &out)
}

/// Reliability-diagram data: `bin_low,bin_high,mean_conf,acc,count`;
/// empty bins leave the undefined statistics blank.
pub fn write_reliability_csv(path: &Path, bins: &[ReliabilityBin]) -> Result<(), ReportError> {
    let mut out = String::from("bin_low,bin_high,mean_conf,acc,count\n");
    for b in bins {
        let conf = b.mean_confidence.map(|v| v.to_string()).unwrap_or_default();
        let acc = b.accuracy.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            b.bin_low, b.bin_high, conf, acc, b.count
        ));
    }
    write_file(path, &out)
}

pub fn write_eval_json(path: &Path, report: &EvalReport) -> Result<(), ReportError> {
    let json = serde_json::to_string_pretty(report).map_err(|source| ReportError::Encode {
        path: path.to_path_buf(),
        source,
    })?;
    write_file(path, &format!("{json}\n"))
}

/// The report as one flat CSV row.
pub fn write_eval_csv(path: &Path, report: &EvalReport) -> Result<(), ReportError> {
    let out = format!(
        "n,accuracy,auc,brier,ece\n{},{},{},{},{}\n",
        report.n, report.accuracy, report.auc, report.brier, report.ece
    );
    write_file(path, &out)
}

/// Ablation table: the baseline row plus one row per removed group.
pub fn write_ablation_csv(path: &Path, results: &[AblationResult]) -> Result<(), ReportError> {
    let mut out = String::from("removed,auc,brier,auc_delta,brier_delta\n");
    for r in results {
        let removed = r.removed.map(|g| g.name()).unwrap_or("baseline");
        out.push_str(&format!(
            "{removed},{},{},{},{}\n",
            r.auc, r.brier, r.auc_delta, r.brier_delta
        ));
    }
    write_file(path, &out)
}

/// Histogram of emitted probabilities over equal-width bins (right-closed
/// except the first), the data behind the prediction-distribution plot.
pub fn write_histogram_csv(path: &Path, probs: &[f64], n_bins: usize) -> Result<(), ReportError> {
    assert!(n_bins >= 1);
    let mut counts = vec![0usize; n_bins];
    for p in probs {
        let raw = (p * n_bins as f64).ceil() as usize;
        counts[raw.saturating_sub(1).min(n_bins - 1)] += 1;
    }
    let width = 1.0 / n_bins as f64;
    let mut out = String::from("bin_low,bin_high,count\n");
    for (b, count) in counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            b as f64 * width,
            (b + 1) as f64 * width,
            count
        ));
    }
    write_file(path, &out)
}
