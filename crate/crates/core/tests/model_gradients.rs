//! End-to-end gradient verification and parameter accounting for both
//! forecaster architectures.

use hoopcast_core::data::{Gender, TeamId};
use hoopcast_core::features::SampleMeta;
use hoopcast_core::models::{grad_check_model, ArchConfig};
use hoopcast_core::nn::Loss;
use hoopcast_core::{LstmForecasterConfig, MatchupSample, Tensor2, TransformerForecasterConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_samples(n: usize, d: usize, seed: u64) -> Vec<MatchupSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let data: Vec<f64> = (0..2 * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            MatchupSample {
                x: Tensor2::from_vec(2, d, data),
                label: Some(u8::from(rng.gen::<bool>())),
                meta: SampleMeta {
                    season: 2020,
                    gender: Gender::Men,
                    t1: TeamId(i as u32 * 2 + 1),
                    t2: TeamId(i as u32 * 2 + 2),
                },
            }
        })
        .collect()
}

fn lstm_arch(d: usize) -> ArchConfig {
    ArchConfig::Lstm(LstmForecasterConfig {
        input_dim: d,
        hidden: 4,
        dense: 3,
        dropout: 0.0,
    })
}

fn transformer_arch(d: usize) -> ArchConfig {
    ArchConfig::Transformer(TransformerForecasterConfig {
        input_dim: d,
        model_dim: 8,
        heads: 2,
        ffn_dim: 8,
        dense1: 8,
        dense2: 4,
        dropout: 0.0,
        positional_embeddings: true,
    })
}

#[test]
fn lstm_full_model_gradient_check() {
    let samples = random_samples(8, 3, 7);
    let model = lstm_arch(3).build(11).unwrap();
    for loss in [Loss::Bce, Loss::Brier] {
        let err = grad_check_model(&model, &samples, loss, 1e-5).unwrap();
        assert!(err < 1e-4, "{loss}: max relative error {err}");
    }
}

#[test]
fn transformer_full_model_gradient_check() {
    let samples = random_samples(8, 4, 13);
    let model = transformer_arch(4).build(17).unwrap();
    for loss in [Loss::Bce, Loss::Brier] {
        let err = grad_check_model(&model, &samples, loss, 1e-5).unwrap();
        assert!(err < 1e-4, "{loss}: max relative error {err}");
    }
}

/// Production-dimension gradient check; slow, so opt in with
/// `cargo test -- --ignored`.
#[test]
#[ignore = "full-size gradient check takes tens of seconds"]
fn full_size_models_pass_gradient_checks() {
    let samples = random_samples(8, 4, 99);
    let lstm = ArchConfig::Lstm(LstmForecasterConfig {
        input_dim: 4,
        hidden: 32,
        dense: 16,
        dropout: 0.0,
    })
    .build(1)
    .unwrap();
    let err = grad_check_model(&lstm, &samples, Loss::Bce, 1e-5).unwrap();
    assert!(err < 1e-4, "lstm: max relative error {err}");

    let mut tf_cfg = TransformerForecasterConfig::with_input_dim(4);
    tf_cfg.dropout = 0.0;
    let transformer = ArchConfig::Transformer(tf_cfg).build(2).unwrap();
    let err = grad_check_model(&transformer, &samples, Loss::Brier, 1e-5).unwrap();
    assert!(err < 1e-4, "transformer: max relative error {err}");
}

#[test]
fn lstm_parameter_count_matches_closed_form() {
    // 4·(4·32 + 32·32 + 32) + (32·16 + 16) + (16·1 + 1) = 5281.
    let arch = ArchConfig::Lstm(LstmForecasterConfig {
        input_dim: 4,
        hidden: 32,
        dense: 16,
        dropout: 0.5,
    });
    assert_eq!(arch.param_count(), 5281);
    let model = arch.build(0).unwrap();
    assert_eq!(model.param_count(), 5281);
}

#[test]
fn positional_embedding_toggle_changes_count_by_two_model_dims() {
    let mut cfg = TransformerForecasterConfig::with_input_dim(4);
    cfg.model_dim = 64;
    let with_pos = ArchConfig::Transformer(cfg.clone());
    cfg.positional_embeddings = false;
    let without = ArchConfig::Transformer(cfg);
    assert_eq!(with_pos.param_count() - without.param_count(), 128);
    assert_eq!(
        with_pos.build(0).unwrap().param_count(),
        with_pos.param_count()
    );
    assert_eq!(
        without.build(0).unwrap().param_count(),
        without.param_count()
    );
}

#[test]
fn same_seed_builds_identical_models() {
    for arch in [lstm_arch(5), transformer_arch(4)] {
        let a = arch.build(123).unwrap();
        let b = arch.build(123).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
        let c = arch.build(124).unwrap();
        assert_ne!(a.flat_params(), c.flat_params());
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let arch = ArchConfig::Transformer(TransformerForecasterConfig {
        input_dim: 4,
        model_dim: 10,
        heads: 4, // 10 % 4 != 0
        ffn_dim: 8,
        dense1: 8,
        dense2: 4,
        dropout: 0.5,
        positional_embeddings: true,
    });
    assert!(arch.build(0).is_err());

    let arch = ArchConfig::Lstm(LstmForecasterConfig {
        input_dim: 0,
        hidden: 4,
        dense: 4,
        dropout: 0.5,
    });
    assert!(arch.build(0).is_err());
}
