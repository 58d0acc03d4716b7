//! Command-line front door for the forecasting pipeline.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use hoopcast::config::{GenderSelection, ModelKind, RowFilter, RunConfig};
use hoopcast::pipeline;
use hoopcast_core::nn::Loss;

#[derive(Parser)]
#[command(
    name = "hoopcast",
    about = "Tournament outcome forecasting: features, training, evaluation, and submissions",
    version
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Flat TOML config file; CLI flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding the competition CSV files.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Directory for caches, checkpoints, and reports.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// men, women, or both.
    #[arg(long, global = true)]
    gender: Option<String>,
    /// lstm or transformer.
    #[arg(long, global = true)]
    model: Option<String>,
    /// bce or brier.
    #[arg(long, global = true)]
    loss: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Last season reserved for validation (training uses earlier ones).
    #[arg(long, global = true)]
    holdout_season: Option<u16>,
    /// Comma-separated feature groups (seed,elo,quality,gender,box).
    #[arg(long, global = true, value_delimiter = ',')]
    feature_groups: Option<Vec<String>>,
    #[arg(long, global = true)]
    lr: Option<f64>,
    #[arg(long, global = true)]
    dropout: Option<f64>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    #[arg(long, global = true)]
    max_epochs: Option<usize>,
    /// Which prepared rows feed training: tournament, regular, or both.
    #[arg(long, global = true)]
    train_rows: Option<String>,
    /// Skip invalid ingest rows (with a warning) instead of aborting.
    #[arg(long, global = true)]
    lenient_ingest: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build (or reuse) the feature tables and their summary stats.
    Features,
    /// Train one model variant on the temporal split.
    Train,
    /// Score a checkpoint on the holdout season.
    Evaluate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Retrain with each feature group removed and tabulate the impact.
    Ablate,
    /// Emit win probabilities for every possible matchup of a season.
    Predict {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Target season; defaults to the season after the holdout.
        #[arg(long)]
        season: Option<u16>,
    },
    /// Run a hyperparameter grid from a sweep file, sequentially.
    Sweep {
        #[arg(long)]
        sweep_file: PathBuf,
    },
}

fn resolve_config(overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = match &overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &overrides.data_dir {
        cfg.data_dir = v.clone();
    }
    if let Some(v) = &overrides.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = &overrides.gender {
        cfg.gender = GenderSelection::parse(v)
            .ok_or_else(|| anyhow::anyhow!("config: unknown gender '{v}'"))?;
    }
    if let Some(v) = &overrides.model {
        cfg.model =
            ModelKind::parse(v).ok_or_else(|| anyhow::anyhow!("config: unknown model '{v}'"))?;
    }
    if let Some(v) = &overrides.loss {
        cfg.loss = Loss::parse(v).ok_or_else(|| anyhow::anyhow!("config: unknown loss '{v}'"))?;
    }
    if let Some(v) = overrides.seed {
        cfg.seed = v;
    }
    if let Some(v) = overrides.holdout_season {
        cfg.holdout_season = v;
    }
    if let Some(v) = &overrides.feature_groups {
        cfg.feature_groups = v.clone();
    }
    if let Some(v) = overrides.lr {
        cfg.lr = Some(v);
    }
    if let Some(v) = overrides.dropout {
        cfg.dropout = v;
    }
    if let Some(v) = overrides.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = overrides.max_epochs {
        cfg.max_epochs = v;
    }
    if let Some(v) = &overrides.train_rows {
        cfg.train_rows = RowFilter::parse(v)
            .ok_or_else(|| anyhow::anyhow!("config: unknown train_rows '{v}'"))?;
    }
    if overrides.lenient_ingest {
        cfg.strict_ingest = false;
    }
    cfg.validate()?;
    if !cfg.data_dir.exists() {
        bail!("config: data dir {} does not exist", cfg.data_dir.display());
    }
    std::fs::create_dir_all(&cfg.out_dir)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = resolve_config(&cli.overrides)?;
    match cli.command {
        Command::Features => {
            pipeline::cmd_features(&cfg)?;
        }
        Command::Train => {
            pipeline::cmd_train(&cfg)?;
        }
        Command::Evaluate { checkpoint } => {
            pipeline::cmd_evaluate(&cfg, checkpoint)?;
        }
        Command::Ablate => {
            pipeline::cmd_ablate(&cfg)?;
        }
        Command::Predict { checkpoint, season } => {
            if let Some(season) = season {
                cfg.predict_season = Some(season);
            }
            pipeline::cmd_predict(&cfg, checkpoint)?;
        }
        Command::Sweep { sweep_file } => {
            pipeline::cmd_sweep(&cfg, &sweep_file)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
