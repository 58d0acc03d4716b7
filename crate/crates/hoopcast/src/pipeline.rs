//! End-to-end command implementations: ingest → features → train →
//! evaluate → ablate → predict → sweep.
//!
//! Feature tables are fitted on regular-season rows of every season; the
//! model trains on pre-holdout rows and validates on the holdout season's
//! tournament rows. Nothing from seasons at or past the holdout ever
//! reaches a fit (asserted where the split is built).

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use hoopcast_core::ablation::{run_ablation, AblationResult};
use hoopcast_core::data::{GameRecord, GameSource, Gender, MatchRow, Season, SeedEntry, TeamId};
use hoopcast_core::elo::compute_elo;
use hoopcast_core::eval::EvalReport;
use hoopcast_core::features::{
    build_samples, season_box_averages, BoxAverages, FeatureTables, LabeledMatchup, SeedTable,
};
use hoopcast_core::glm::fit_glm_quality;
use hoopcast_core::matchups::{enumerate_matchups, MatchupId};
use hoopcast_core::models::train::fit_forecaster;
use hoopcast_core::models::TrainingHistory;
use hoopcast_core::prep::symmetrize;
use hoopcast_core::scaler::Scaler;

use crate::config::{write_manifest, ModelKind, RowFilter, RunConfig};
use crate::ingest::{parse_games, parse_seeds, parse_teams, RowIssue};
use crate::reports::{
    write_ablation_csv, write_eval_csv, write_eval_json, write_histogram_csv, write_history_csv,
    write_reliability_csv,
};
use crate::submission::write_submission;
use crate::tables_io::{
    read_feature_cache, write_feature_cache, write_feature_summary, write_match_rows,
};

pub struct Dataset {
    pub games: Vec<GameRecord>,
    pub seeds: Vec<SeedEntry>,
    pub teams: BTreeMap<(Gender, TeamId), String>,
    pub issues: Vec<(String, RowIssue)>,
}

fn gender_prefix(gender: Gender) -> &'static str {
    match gender {
        Gender::Men => "M",
        Gender::Women => "W",
    }
}

/// Loads every input file for the selected genders, failing up front with
/// the full list of missing files.
pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let mut required: Vec<(PathBuf, Gender, Option<GameSource>)> = Vec::new();
    for gender in cfg.gender.genders() {
        let p = gender_prefix(gender);
        let dir = &cfg.data_dir;
        required.push((
            dir.join(format!("{p}RegularSeasonDetailedResults.csv")),
            gender,
            Some(GameSource::RegularSeason),
        ));
        required.push((
            dir.join(format!("{p}NCAATourneyDetailedResults.csv")),
            gender,
            Some(GameSource::Tournament),
        ));
        required.push((dir.join(format!("{p}NCAATourneySeeds.csv")), gender, None));
        required.push((dir.join(format!("{p}Teams.csv")), gender, None));
    }
    let missing: Vec<String> = required
        .iter()
        .filter(|(path, _, _)| !path.exists())
        .map(|(path, _, _)| path.display().to_string())
        .collect();
    if !missing.is_empty() {
        bail!("ingest: missing input files: {}", missing.join(", "));
    }

    let mut dataset = Dataset {
        games: Vec::new(),
        seeds: Vec::new(),
        teams: BTreeMap::new(),
        issues: Vec::new(),
    };
    for (path, gender, source) in required {
        match source {
            Some(source) => {
                let parsed = parse_games(&path, gender, source, cfg.strict_ingest)
                    .with_context(|| format!("ingest: {}", path.display()))?;
                if parsed.records.is_empty() {
                    eprintln!("warning: {} holds no game rows", path.display());
                }
                let name = path.display().to_string();
                dataset
                    .issues
                    .extend(parsed.issues.into_iter().map(|i| (name.clone(), i)));
                dataset.games.extend(parsed.records);
            }
            None if path
                .file_name()
                .unwrap()
                .to_string_lossy()
                .contains("Seeds") =>
            {
                dataset.seeds.extend(
                    parse_seeds(&path, gender)
                        .with_context(|| format!("ingest: {}", path.display()))?,
                );
            }
            None => {
                let teams =
                    parse_teams(&path).with_context(|| format!("ingest: {}", path.display()))?;
                for (id, name) in teams {
                    dataset.teams.insert((gender, id), name);
                }
            }
        }
    }
    Ok(dataset)
}

fn rows_of(games: &[GameRecord]) -> Result<Vec<MatchRow>> {
    symmetrize(games).context("prep: symmetrization failed")
}

/// Fits all feature tables from the dataset's regular-season rows.
pub fn build_feature_tables(dataset: &Dataset, cfg: &RunConfig) -> Result<FeatureTables> {
    let fitting_games: Vec<GameRecord> = dataset
        .games
        .iter()
        .filter(|g| {
            g.source == GameSource::RegularSeason
                || (cfg.features_use_tournament && g.source == GameSource::Tournament)
        })
        .cloned()
        .collect();
    let rows = rows_of(&fitting_games)?;

    // Elo consumes one row per game in chronological order.
    let mut winner_rows: Vec<MatchRow> = rows.iter().filter(|r| r.label == 1).cloned().collect();
    winner_rows.sort_by_key(|r| (r.season, r.day_num, r.gender, r.t1.0, r.t2.0));
    let elo = compute_elo(&winner_rows, &cfg.elo_config()).context("features: elo")?;

    let quality = fit_glm_quality(&rows, cfg.ridge).context("features: quality fit")?;

    let mut by_group: BTreeMap<(Gender, Season), Vec<MatchRow>> = BTreeMap::new();
    for row in rows {
        by_group
            .entry((row.gender, row.season))
            .or_default()
            .push(row);
    }
    let mut box_avgs: BTreeMap<(Gender, Season, TeamId), BoxAverages> = BTreeMap::new();
    for ((gender, season), group) in by_group {
        for (team, avgs) in season_box_averages(&group) {
            box_avgs.insert((gender, season, team), avgs);
        }
    }

    Ok(FeatureTables::new(
        SeedTable::from_entries(&dataset.seeds),
        elo,
        quality,
        box_avgs,
    ))
}

/// Path of the feature cache inside the output directory.
pub fn feature_cache_path(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.join("features.csv")
}

fn fingerprint_path(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.join("features.fingerprint")
}

/// Loads the cached tables when the cache was built under the same
/// feature-relevant configuration; rebuilds (and rewrites the cache)
/// otherwise. Returns the tables and whether the cache was used.
pub fn ensure_feature_tables(cfg: &RunConfig) -> Result<(FeatureTables, bool)> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create {}", cfg.out_dir.display()))?;
    let cache = feature_cache_path(cfg);
    let fp_path = fingerprint_path(cfg);
    let fingerprint = cfg.features_fingerprint();
    if cache.exists() && fp_path.exists() {
        let stored = std::fs::read_to_string(&fp_path).unwrap_or_default();
        if stored.trim() == fingerprint {
            let tables = read_feature_cache(&cache, cfg.elo_base)?;
            return Ok((tables, true));
        }
    }
    let dataset = load_dataset(cfg)?;
    report_issues(&dataset);
    let tables = build_feature_tables(&dataset, cfg)?;
    write_feature_cache(&cache, &tables)?;
    std::fs::write(&fp_path, format!("{fingerprint}\n"))
        .with_context(|| format!("cannot write {}", fp_path.display()))?;
    Ok((tables, false))
}

fn report_issues(dataset: &Dataset) {
    for (file, issue) in &dataset.issues {
        eprintln!(
            "warning: {file} row {}: {} (skipped)",
            issue.row, issue.message
        );
    }
    if dataset.games.is_empty() {
        eprintln!("warning: no games parsed");
    }
}

pub struct SplitMatchups {
    pub train: Vec<LabeledMatchup>,
    pub val: Vec<LabeledMatchup>,
}

/// Temporal split: training rows from seasons strictly before the holdout
/// (sources per `train_rows`), validation rows from the holdout season's
/// tournament.
pub fn split_matchups(dataset: &Dataset, cfg: &RunConfig) -> Result<SplitMatchups> {
    let rows = rows_of(&dataset.games)?;
    let holdout = cfg.holdout_season;
    let train_source_ok = |source: GameSource| match cfg.train_rows {
        RowFilter::Tournament => source == GameSource::Tournament,
        RowFilter::Regular => source == GameSource::RegularSeason,
        RowFilter::Both => true,
    };
    let train: Vec<LabeledMatchup> = rows
        .iter()
        .filter(|r| r.season < holdout && train_source_ok(r.source))
        .map(LabeledMatchup::from)
        .collect();
    let val: Vec<LabeledMatchup> = rows
        .iter()
        .filter(|r| r.season == holdout && r.source == GameSource::Tournament)
        .map(LabeledMatchup::from)
        .collect();

    // Leakage guard: nothing at or past the holdout season may be fitted.
    assert!(
        train.iter().all(|m| m.season < holdout),
        "leakage: training matchup at or past season {holdout}"
    );

    if train.is_empty() {
        bail!("split: no training rows before season {holdout}");
    }
    if val.is_empty() {
        bail!("split: no tournament rows in holdout season {holdout}");
    }
    Ok(SplitMatchups { train, val })
}

/// `features` command: build (or reuse) the cached tables, write the
/// summary CSV, and print it.
pub fn cmd_features(cfg: &RunConfig) -> Result<FeatureTables> {
    let (tables, from_cache) = ensure_feature_tables(cfg)?;
    let summary = cfg.out_dir.join("feature-summary.csv");
    write_feature_summary(&summary, &tables)?;
    if cfg.export_rows {
        let dataset = load_dataset(cfg)?;
        let rows = rows_of(&dataset.games)?;
        write_match_rows(&cfg.out_dir.join("match-rows.csv"), &rows)?;
    }
    write_manifest(cfg, "features", &[feature_cache_path(cfg), summary.clone()])?;

    if from_cache {
        println!(
            "features: loaded cached tables from {}",
            feature_cache_path(cfg).display()
        );
    } else {
        println!(
            "features: built tables into {}",
            feature_cache_path(cfg).display()
        );
    }
    println!(
        "features: {} seeds, {} elo ratings, {} qualities, {} box-average rows",
        tables.seeds.seeds.len(),
        tables.elo.ratings.len(),
        tables.quality.quality.len(),
        tables.box_avgs.len()
    );
    print!("{}", std::fs::read_to_string(&summary)?);
    Ok(tables)
}

/// `train` command: temporal split, scaler on the training partition
/// only, fit, and persist checkpoint + history.
pub fn cmd_train(cfg: &RunConfig) -> Result<(PathBuf, TrainingHistory)> {
    let (tables, _) = ensure_feature_tables(cfg)?;
    let dataset = load_dataset(cfg)?;
    let split = split_matchups(&dataset, cfg)?;
    let groups = cfg.groups()?;

    let mut train_samples = build_samples(&split.train, &tables, &groups)?;
    let mut val_samples = build_samples(&split.val, &tables, &groups)?;
    let scaler = Scaler::fit(&train_samples).context("train: scaler fit")?;
    scaler
        .apply_all(&mut train_samples)
        .and_then(|()| scaler.apply_all(&mut val_samples))
        .context("train: scaling")?;

    let d = hoopcast_core::features::feature_dim(&groups);
    let arch = cfg.arch_config(d);
    let train_cfg = cfg.train_config();
    let checkpoint = fit_forecaster(
        &arch,
        &train_samples,
        &val_samples,
        scaler,
        groups,
        &train_cfg,
    )
    .context("train")?;

    let tag = cfg.variant_tag();
    let checkpoint_path = cfg.out_dir.join(format!("checkpoint-{tag}.json"));
    let history_path = cfg.out_dir.join(format!("history-{tag}.csv"));
    crate::checkpoint_io::save_checkpoint(&checkpoint_path, &checkpoint)?;
    write_history_csv(&history_path, &checkpoint.history)?;
    write_manifest(cfg, "train", &[checkpoint_path.clone(), history_path])?;

    let history = checkpoint.history.clone();
    println!(
        "train: {} epochs, best epoch {} (val loss {:.6}), stopped by {:?}",
        history.epochs.len(),
        history.best_epoch,
        history.best_val_loss(),
        history.stop_reason
    );
    println!("train: checkpoint written to {}", checkpoint_path.display());
    Ok((checkpoint_path, history))
}

/// `evaluate` command: metrics of a checkpoint on the holdout season's
/// tournament rows.
pub fn cmd_evaluate(cfg: &RunConfig, checkpoint_path: Option<PathBuf>) -> Result<EvalReport> {
    let path = checkpoint_path.unwrap_or_else(|| {
        cfg.out_dir
            .join(format!("checkpoint-{}.json", cfg.variant_tag()))
    });
    let checkpoint = crate::checkpoint_io::load_checkpoint(&path)?;

    let (tables, _) = ensure_feature_tables(cfg)?;
    let dataset = load_dataset(cfg)?;
    let split = split_matchups(&dataset, cfg)?;
    // The checkpoint's stored groups define the input layout.
    let samples = build_samples(&split.val, &tables, &checkpoint.feature_groups)?;
    let probs = checkpoint
        .predict_proba(&samples, false)
        .context("evaluate: prediction")?;
    let labels: Vec<u8> = split.val.iter().map(|m| m.label).collect();
    let report = EvalReport::compute(&probs, &labels).context("evaluate: metrics")?;

    let tag = cfg.variant_tag();
    let json_path = cfg.out_dir.join(format!("eval-{tag}.json"));
    let csv_path = cfg.out_dir.join(format!("eval-{tag}.csv"));
    let bins_path = cfg.out_dir.join(format!("reliability-{tag}.csv"));
    write_eval_json(&json_path, &report)?;
    write_eval_csv(&csv_path, &report)?;
    write_reliability_csv(&bins_path, &report.bins)?;
    write_manifest(cfg, "evaluate", &[json_path, csv_path, bins_path])?;

    println!(
        "evaluate: n={} accuracy={:.4} auc={:.4} brier={:.4} ece={:.4}",
        report.n, report.accuracy, report.auc, report.brier, report.ece
    );
    Ok(report)
}

/// `ablate` command: baseline plus one retrain per removed feature group.
pub fn cmd_ablate(cfg: &RunConfig) -> Result<Vec<AblationResult>> {
    let (tables, _) = ensure_feature_tables(cfg)?;
    let dataset = load_dataset(cfg)?;
    let split = split_matchups(&dataset, cfg)?;
    let groups = cfg.groups()?;
    let d = hoopcast_core::features::feature_dim(&groups);
    let arch = cfg.arch_config(d);
    let train_cfg = cfg.train_config();

    let results = run_ablation(
        &groups,
        &split.train,
        &split.val,
        &tables,
        &arch,
        &train_cfg,
    )
    .map_err(|e| anyhow::anyhow!("ablate: {e}"))?;

    let path = cfg.out_dir.join("ablation.csv");
    write_ablation_csv(&path, &results)?;
    write_manifest(cfg, "ablate", std::slice::from_ref(&path))?;

    for r in &results {
        let name = r.removed.map(|g| g.name()).unwrap_or("baseline");
        println!(
            "ablate: {:<10} auc={:.4} ({:+.4}) brier={:.4} ({:+.4})",
            name, r.auc, r.auc_delta, r.brier, r.brier_delta
        );
    }
    println!("ablate: table written to {}", path.display());
    Ok(results)
}

/// `predict` command: enumerate every possible matchup of the target
/// season's seeded teams and write the submission file.
pub fn cmd_predict(cfg: &RunConfig, checkpoint_path: Option<PathBuf>) -> Result<PathBuf> {
    let path = checkpoint_path.unwrap_or_else(|| {
        cfg.out_dir
            .join(format!("checkpoint-{}.json", cfg.variant_tag()))
    });
    let checkpoint = crate::checkpoint_io::load_checkpoint(&path)?;
    let (tables, _) = ensure_feature_tables(cfg)?;

    let season = cfg.predict_season();
    let mut per_gender: BTreeMap<Gender, Vec<TeamId>> = BTreeMap::new();
    for gender in cfg.gender.genders() {
        let teams: Vec<TeamId> = tables
            .seeds
            .seeds
            .keys()
            .filter(|(g, s, _)| *g == gender && *s == season)
            .map(|(_, _, t)| *t)
            .collect();
        if !teams.is_empty() {
            per_gender.insert(gender, teams);
        }
    }
    if per_gender.is_empty() {
        bail!("predict: no seeded teams for season {season}");
    }

    let pairs =
        enumerate_matchups(season, &per_gender).map_err(|e| anyhow::anyhow!("predict: {e}"))?;
    let mut samples = Vec::with_capacity(pairs.len());
    for (gender, id) in &pairs {
        // Lower id occupies the team-1 row: the emitted probability is the
        // chance that team_low wins.
        samples.push(hoopcast_core::features::assemble_features(
            id.team_low,
            id.team_high,
            *gender,
            season,
            &tables,
            &checkpoint.feature_groups,
        )?);
    }
    let probs = checkpoint
        .predict_proba(&samples, cfg.symmetric_predict)
        .context("predict")?;

    let ids: Vec<MatchupId> = pairs.iter().map(|(_, id)| *id).collect();
    let submission_path = cfg.out_dir.join(format!("submission-{season}.csv"));
    write_submission(&ids, &probs, &submission_path, cfg.clamp_submission)
        .map_err(|e| anyhow::anyhow!("predict: {e}"))?;
    let histogram_path = cfg
        .out_dir
        .join(format!("prediction-histogram-{season}.csv"));
    write_histogram_csv(&histogram_path, &probs, 20)?;

    let mut outputs = vec![submission_path.clone(), histogram_path];
    if cfg.audit_features {
        let audit_path = cfg
            .out_dir
            .join(format!("submission-features-{season}.csv"));
        write_audit_features(&audit_path, &pairs, &samples)?;
        outputs.push(audit_path);
    }
    write_manifest(cfg, "predict", &outputs)?;

    println!(
        "predict: {} matchups for season {season} written to {}",
        ids.len(),
        submission_path.display()
    );
    Ok(submission_path)
}

fn write_audit_features(
    path: &PathBuf,
    pairs: &[(Gender, MatchupId)],
    samples: &[hoopcast_core::MatchupSample],
) -> Result<()> {
    let d = samples.first().map(|s| s.x.cols()).unwrap_or(0);
    let mut header = String::from("ID,gender");
    for side in ["t1", "t2"] {
        for c in 0..d {
            header.push_str(&format!(",{side}_f{c}"));
        }
    }
    header.push('\n');
    let mut out = header;
    for ((gender, id), sample) in pairs.iter().zip(samples.iter()) {
        out.push_str(&format!("{},{gender}", id.render()));
        for r in 0..2 {
            for v in sample.x.row(r) {
                out.push_str(&format!(",{v}"));
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Axes of the hyperparameter sweep file; every listed value combines
/// with every other axis (full cross product), executed sequentially.
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub model: Option<Vec<ModelKind>>,
    #[serde(default)]
    pub loss: Option<Vec<hoopcast_core::nn::Loss>>,
    #[serde(default)]
    pub lr: Option<Vec<f64>>,
    #[serde(default)]
    pub dropout: Option<Vec<f64>>,
    #[serde(default)]
    pub batch_size: Option<Vec<usize>>,
    #[serde(default)]
    pub lstm_hidden: Option<Vec<usize>>,
    #[serde(default)]
    pub tf_heads: Option<Vec<usize>>,
    #[serde(default)]
    pub tf_ffn: Option<Vec<usize>>,
    #[serde(default)]
    pub l2: Option<Vec<f64>>,
}

impl SweepSpec {
    pub fn load(path: &std::path::Path) -> Result<SweepSpec> {
        let content = std::fs::read_to_string(path)
            .with_context(|| format!("sweep: cannot read {}", path.display()))?;
        toml::from_str(&content)
            .with_context(|| format!("sweep: {} does not match the schema", path.display()))
    }

    /// Expands the grid into concrete run configurations.
    pub fn cells(&self, base: &RunConfig) -> Vec<RunConfig> {
        let models = self.model.clone().unwrap_or_else(|| vec![base.model]);
        let losses = self.loss.clone().unwrap_or_else(|| vec![base.loss]);
        let lrs = self
            .lr
            .clone()
            .map(|v| v.into_iter().map(Some).collect())
            .unwrap_or_else(|| vec![base.lr]);
        let dropouts = self.dropout.clone().unwrap_or_else(|| vec![base.dropout]);
        let batches = self
            .batch_size
            .clone()
            .unwrap_or_else(|| vec![base.batch_size]);
        let hiddens = self
            .lstm_hidden
            .clone()
            .unwrap_or_else(|| vec![base.lstm_hidden]);
        let heads = self.tf_heads.clone().unwrap_or_else(|| vec![base.tf_heads]);
        let ffns = self.tf_ffn.clone().unwrap_or_else(|| vec![base.tf_ffn]);
        let l2s = self.l2.clone().unwrap_or_else(|| vec![base.l2]);

        let mut cells = Vec::new();
        for model in &models {
            for loss in &losses {
                for lr in &lrs {
                    for dropout in &dropouts {
                        for batch in &batches {
                            for hidden in &hiddens {
                                for head in &heads {
                                    for ffn in &ffns {
                                        for l2 in &l2s {
                                            let mut cell = base.clone();
                                            cell.model = *model;
                                            cell.loss = *loss;
                                            cell.lr = *lr;
                                            cell.dropout = *dropout;
                                            cell.batch_size = *batch;
                                            cell.lstm_hidden = *hidden;
                                            cell.tf_heads = *head;
                                            cell.tf_ffn = *ffn;
                                            cell.l2 = *l2;
                                            cells.push(cell);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

/// One sweep cell's outcome.
pub struct SweepOutcome {
    pub tag: String,
    pub best_val_loss: f64,
    pub best_epoch: usize,
    pub epochs: usize,
}

/// `sweep` command: run every grid cell sequentially. Each cell writes
/// its own checkpoint and history (tagged by cell index and variant), and
/// a summary CSV collects the monitored results.
pub fn cmd_sweep(cfg: &RunConfig, sweep_path: &std::path::Path) -> Result<Vec<SweepOutcome>> {
    let spec = SweepSpec::load(sweep_path)?;
    let cells = spec.cells(cfg);
    let mut outcomes = Vec::new();
    let mut summary = String::from(
        "cell,model,loss,lr,dropout,batch_size,lstm_hidden,tf_heads,tf_ffn,l2,epochs,best_epoch,best_val_loss,val_acc_at_best\n",
    );
    for (i, cell) in cells.iter().enumerate() {
        let mut named = cell.clone();
        // Cell outputs must not clobber each other.
        named.out_dir = cfg
            .out_dir
            .join(format!("cell-{i:03}-{}", cell.variant_tag()));
        std::fs::create_dir_all(&named.out_dir)
            .with_context(|| format!("cannot create {}", named.out_dir.display()))?;
        let (_, history) = cmd_train(&named)?;
        let best = &history.epochs[history.best_epoch - 1];
        summary.push_str(&format!(
            "{i},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.model.name(),
            cell.loss.name(),
            cell.train_config().lr,
            cell.dropout,
            cell.batch_size,
            cell.lstm_hidden,
            cell.tf_heads,
            cell.tf_ffn,
            cell.l2,
            history.epochs.len(),
            history.best_epoch,
            best.val_loss,
            best.val_accuracy
        ));
        outcomes.push(SweepOutcome {
            tag: format!("cell-{i:03}-{}", cell.variant_tag()),
            best_val_loss: best.val_loss,
            best_epoch: history.best_epoch,
            epochs: history.epochs.len(),
        });
    }
    let summary_path = cfg.out_dir.join("sweep-results.csv");
    std::fs::write(&summary_path, summary)
        .with_context(|| format!("cannot write {}", summary_path.display()))?;
    write_manifest(cfg, "sweep", std::slice::from_ref(&summary_path))?;
    println!(
        "sweep: {} cells, results in {}",
        outcomes.len(),
        summary_path.display()
    );
    Ok(outcomes)
}
