//! Larger synthetic league driven through the stock settings for
//! all four variants; guards that the default configuration genuinely
//! learns and that the four-variant comparison machinery behaves.

mod common;

use common::{write_synthetic_dataset, LeagueSpec};
use hoopcast::config::{ModelKind, RunConfig};
use hoopcast::pipeline;
use hoopcast_core::nn::Loss;

#[test]
fn default_configuration_learns_a_structured_league() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir_all(&data).unwrap();
    write_synthetic_dataset(
        &data,
        &LeagueSpec {
            seasons: (2012..=2021).collect(),
            predict_season: Some(2022),
            teams_per_gender: 16,
            seeded_teams: 8,
            seed: 5,
        },
    );

    let mut reports = Vec::new();
    for model in [ModelKind::Lstm, ModelKind::Transformer] {
        for loss in [Loss::Bce, Loss::Brier] {
            let out = dir
                .path()
                .join(format!("out-{}-{}", model.name(), loss.name()));
            std::fs::create_dir_all(&out).unwrap();
            let cfg = RunConfig {
                data_dir: data.clone(),
                out_dir: out,
                holdout_season: 2021,
                model,
                loss,
                seed: 11,
                ..RunConfig::default()
            };
            pipeline::cmd_train(&cfg).unwrap();
            let report = pipeline::cmd_evaluate(&cfg, None).unwrap();
            println!(
                "smoke {}-{}: n={} acc={:.4} auc={:.4} brier={:.4} ece={:.4}",
                model.name(),
                loss.name(),
                report.n,
                report.accuracy,
                report.auc,
                report.brier,
                report.ece
            );
            reports.push(report);
        }
    }
    // Latent strengths drive outcomes, so the defaults must beat chance
    // comfortably for every variant.
    for r in &reports {
        assert!(r.auc > 0.65, "auc {}", r.auc);
        assert!(r.brier < 0.25, "brier {}", r.brier);
    }
}
