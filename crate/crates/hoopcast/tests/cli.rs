//! End-to-end runs of the `hoopcast` binary against a synthetic dataset.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{write_synthetic_dataset, LeagueSpec};

fn hoopcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoopcast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn setup(dir: &Path) -> (String, String) {
    let data = dir.join("data");
    let out = dir.join("out");
    std::fs::create_dir_all(&data).unwrap();
    std::fs::create_dir_all(&out).unwrap();
    write_synthetic_dataset(&data, &LeagueSpec::default());
    (
        data.to_string_lossy().to_string(),
        out.to_string_lossy().to_string(),
    )
}

#[test]
fn full_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (data, out) = setup(dir.path());
    let base = [
        "--data-dir",
        data.as_str(),
        "--out-dir",
        out.as_str(),
        "--holdout-season",
        "2021",
        "--max-epochs",
        "25",
        "--seed",
        "7",
    ];

    // features: first run builds, second run reuses the cache.
    let run1 = hoopcast(&[&["features"], &base[..]].concat());
    assert_success(&run1, "features (build)");
    assert!(String::from_utf8_lossy(&run1.stdout).contains("built tables"));
    let cache_bytes = std::fs::read(format!("{out}/features.csv")).unwrap();
    let run2 = hoopcast(&[&["features"], &base[..]].concat());
    assert_success(&run2, "features (cache)");
    assert!(String::from_utf8_lossy(&run2.stdout).contains("loaded cached tables"));
    assert_eq!(
        cache_bytes,
        std::fs::read(format!("{out}/features.csv")).unwrap()
    );
    assert!(Path::new(&format!("{out}/feature-summary.csv")).exists());
    assert!(Path::new(&format!("{out}/features.manifest.json")).exists());

    // cache deleted → the tables rebuild bit-identically
    std::fs::remove_file(format!("{out}/features.csv")).unwrap();
    std::fs::remove_file(format!("{out}/features.fingerprint")).unwrap();
    let run3 = hoopcast(&[&["features"], &base[..]].concat());
    assert_success(&run3, "features (rebuild)");
    assert!(String::from_utf8_lossy(&run3.stdout).contains("built tables"));
    assert_eq!(
        cache_bytes,
        std::fs::read(format!("{out}/features.csv")).unwrap()
    );

    // train
    let train = hoopcast(&[&["train"], &base[..]].concat());
    assert_success(&train, "train");
    let checkpoint = format!("{out}/checkpoint-lstm-bce.json");
    let history = format!("{out}/history-lstm-bce.csv");
    assert!(Path::new(&checkpoint).exists());
    let history_content = std::fs::read_to_string(&history).unwrap();
    assert!(history_content.starts_with("epoch,train_loss,val_loss,val_acc,lr\n"));
    // one row per completed epoch
    let epochs = history_content.lines().count() - 1;
    assert!((1..=25).contains(&epochs));

    // evaluate
    let eval = hoopcast(&[&["evaluate"], &base[..]].concat());
    assert_success(&eval, "evaluate");
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(format!("{out}/eval-lstm-bce.json")).unwrap(),
    )
    .unwrap();
    for key in ["n", "accuracy", "auc", "brier", "ece"] {
        assert!(report.get(key).is_some(), "report missing {key}");
    }
    assert!(Path::new(&format!("{out}/reliability-lstm-bce.csv")).exists());

    // predict (men only → C(8,2) = 28 rows)
    let predict = hoopcast(
        &[
            &["predict"],
            &base[..],
            &["--gender", "men", "--season", "2022"],
        ]
        .concat(),
    );
    assert_success(&predict, "predict");
    let submission = std::fs::read_to_string(format!("{out}/submission-2022.csv")).unwrap();
    let lines: Vec<&str> = submission.lines().collect();
    assert_eq!(lines[0], "ID,Pred");
    assert_eq!(lines.len(), 1 + 28);
    assert!(Path::new(&format!("{out}/prediction-histogram-2022.csv")).exists());

    // Both genders seeded 8 each → Σ C(8,2) = 56 rows.
    let predict_both = hoopcast(&[&["predict"], &base[..], &["--season", "2022"]].concat());
    assert_success(&predict_both, "predict (both genders)");
    let submission = std::fs::read_to_string(format!("{out}/submission-2022.csv")).unwrap();
    assert_eq!(submission.lines().count(), 1 + 56);
}

#[test]
fn sweep_writes_a_checkpoint_per_variant() {
    let dir = tempfile::tempdir().unwrap();
    let (data, out) = setup(dir.path());
    let sweep_file = dir.path().join("grid.toml");
    std::fs::write(
        &sweep_file,
        "model = [\"lstm\", \"transformer\"]\nloss = [\"bce\", \"brier\"]\n",
    )
    .unwrap();

    let sweep = hoopcast(&[
        "sweep",
        "--sweep-file",
        sweep_file.to_str().unwrap(),
        "--data-dir",
        &data,
        "--out-dir",
        &out,
        "--holdout-season",
        "2021",
        "--max-epochs",
        "6",
    ]);
    assert_success(&sweep, "sweep");

    let mut checkpoints = 0;
    for entry in std::fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for inner in std::fs::read_dir(&path).unwrap() {
                let name = inner.unwrap().file_name().to_string_lossy().to_string();
                if name.starts_with("checkpoint-") {
                    checkpoints += 1;
                }
            }
        }
    }
    assert_eq!(checkpoints, 4);

    let summary = std::fs::read_to_string(format!("{out}/sweep-results.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5); // header + 4 cells
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (data, out) = setup(dir.path());
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "model = \"transformer\"\nloss = \"bce\"\nmax_epochs = 5\nholdout_season = 2021\ndata_dir = \"{data}\"\nout_dir = \"{out}\"\n"
        ),
    )
    .unwrap();

    let train = hoopcast(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--loss",
        "brier",
    ]);
    assert_success(&train, "train with config");
    assert!(Path::new(&format!("{out}/checkpoint-transformer-brier.json")).exists());
}

#[test]
fn helpful_errors_and_nonzero_exits() {
    let dir = tempfile::tempdir().unwrap();
    let (data, out) = setup(dir.path());

    // Missing data directory.
    let out1 = hoopcast(&["features", "--data-dir", "/nonexistent", "--out-dir", &out]);
    assert!(!out1.status.success());
    assert!(String::from_utf8_lossy(&out1.stderr).contains("error:"));

    // Unknown feature group.
    let out2 = hoopcast(&[
        "train",
        "--data-dir",
        &data,
        "--out-dir",
        &out,
        "--feature-groups",
        "seed,coach",
    ]);
    assert!(!out2.status.success());
    assert!(String::from_utf8_lossy(&out2.stderr).contains("coach"));

    // Unknown model name.
    let out3 = hoopcast(&[
        "train",
        "--data-dir",
        &data,
        "--out-dir",
        &out,
        "--model",
        "gnn",
    ]);
    assert!(!out3.status.success());
    assert!(String::from_utf8_lossy(&out3.stderr).contains("gnn"));

    // Holdout season with no tournament rows.
    let out4 = hoopcast(&[
        "train",
        "--data-dir",
        &data,
        "--out-dir",
        &out,
        "--holdout-season",
        "2035",
    ]);
    assert!(!out4.status.success());
    assert!(String::from_utf8_lossy(&out4.stderr).contains("2035"));
}

#[test]
fn evaluate_report_matches_direct_metric_calls() {
    use hoopcast::config::RunConfig;
    use hoopcast::pipeline;
    use hoopcast_core::eval;
    use hoopcast_core::features::build_samples;

    let dir = tempfile::tempdir().unwrap();
    let (data, out) = setup(dir.path());
    let cfg = RunConfig {
        data_dir: data.into(),
        out_dir: out.clone().into(),
        holdout_season: 2021,
        max_epochs: 8,
        seed: 3,
        ..RunConfig::default()
    };
    pipeline::cmd_train(&cfg).unwrap();
    let report = pipeline::cmd_evaluate(&cfg, None).unwrap();

    // Recompute every metric with the library functions on the same
    // probabilities the command scored.
    let checkpoint = hoopcast::checkpoint_io::load_checkpoint(Path::new(&format!(
        "{out}/checkpoint-lstm-bce.json"
    )))
    .unwrap();
    let (tables, _) = pipeline::ensure_feature_tables(&cfg).unwrap();
    let dataset = pipeline::load_dataset(&cfg).unwrap();
    let split = pipeline::split_matchups(&dataset, &cfg).unwrap();
    let samples = build_samples(&split.val, &tables, &checkpoint.feature_groups).unwrap();
    let probs = checkpoint.predict_proba(&samples, false).unwrap();
    let labels: Vec<u8> = split.val.iter().map(|m| m.label).collect();

    assert_eq!(report.n, probs.len());
    assert_eq!(
        report.accuracy,
        eval::accuracy(&probs, &labels, 0.5).unwrap()
    );
    assert_eq!(report.auc, eval::auc(&probs, &labels).unwrap());
    assert_eq!(report.brier, eval::brier(&probs, &labels).unwrap());
    assert_eq!(report.ece, eval::ece(&probs, &labels, 10).unwrap());
}

#[test]
fn submission_round_trips_through_reader() {
    let dir = tempfile::tempdir().unwrap();
    let (data, out) = setup(dir.path());
    let base = [
        "--data-dir",
        data.as_str(),
        "--out-dir",
        out.as_str(),
        "--holdout-season",
        "2021",
        "--max-epochs",
        "5",
        "--gender",
        "men",
    ];
    assert_success(&hoopcast(&[&["train"], &base[..]].concat()), "train");
    assert_success(
        &hoopcast(&[&["predict"], &base[..], &["--season", "2022"]].concat()),
        "predict",
    );

    let path = format!("{out}/submission-2022.csv");
    let rows = hoopcast::submission::read_submission(Path::new(&path)).unwrap();
    assert_eq!(rows.len(), 28);
    let mut ids: Vec<String> = rows.iter().map(|(id, _)| id.render()).collect();
    let sorted = {
        let mut s = ids.clone();
        s.sort();
        s
    };
    assert_eq!(ids, sorted, "ids must be emitted in sorted order");
    ids.dedup();
    assert_eq!(ids.len(), 28, "ids must be unique");
    for (_, p) in &rows {
        assert!(*p > 0.0 && *p < 1.0);
    }
}
