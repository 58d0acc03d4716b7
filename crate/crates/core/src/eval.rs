//! Discrimination and calibration metrics: accuracy, rank-based AUC, Brier
//! score, ECE, and reliability bins.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::nn::loss::brier_loss;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    EmptyInput,
    LengthMismatch {
        probs: usize,
        labels: usize,
    },
    /// AUC needs at least one positive and one negative label.
    SingleClass,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptyInput => write!(f, "metric input is empty"),
            EvalError::LengthMismatch { probs, labels } => {
                write!(f, "{probs} probabilities vs {labels} labels")
            }
            EvalError::SingleClass => write!(f, "AUC undefined: labels contain a single class"),
        }
    }
}

impl core::error::Error for EvalError {}

fn check_lengths(p: &[f64], y: &[u8]) -> Result<(), EvalError> {
    if p.len() != y.len() {
        return Err(EvalError::LengthMismatch {
            probs: p.len(),
            labels: y.len(),
        });
    }
    if p.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(())
}

/// Fraction of correct threshold decisions; a probability equal to the
/// threshold counts as predicting class 1.
pub fn accuracy(p: &[f64], y: &[u8], threshold: f64) -> Result<f64, EvalError> {
    check_lengths(p, y)?;
    let correct = p
        .iter()
        .zip(y.iter())
        .filter(|(pi, yi)| u8::from(**pi >= threshold) == **yi)
        .count();
    Ok(correct as f64 / p.len() as f64)
}

/// Area under the ROC curve via the rank statistic: the probability that a
/// random positive outscores a random negative, ties worth half. Runs in
/// O(n log n) through average ranks.
pub fn auc(p: &[f64], y: &[u8]) -> Result<f64, EvalError> {
    check_lengths(p, y)?;
    let n = p.len();
    let n_pos = y.iter().filter(|v| **v == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|a, b| p[*a].partial_cmp(&p[*b]).expect("non-finite probability"));

    // Average ranks over tied runs (1-based ranks).
    let mut rank = alloc::vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && p[idx[j + 1]] == p[idx[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for k in i..=j {
            rank[idx[k]] = avg;
        }
        i = j + 1;
    }

    let rank_sum_pos: f64 = y
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == 1)
        .map(|(k, _)| rank[k])
        .sum();
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Mean squared error of probabilities against outcomes; shares the
/// implementation with the Brier training loss.
pub fn brier(p: &[f64], y: &[u8]) -> Result<f64, EvalError> {
    check_lengths(p, y)?;
    let yf: Vec<f64> = y.iter().map(|v| f64::from(*v)).collect();
    Ok(brier_loss(p, &yf).0)
}

/// One confidence bin of a reliability diagram. Statistics of empty bins
/// are undefined and withheld.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub mean_confidence: Option<f64>,
    pub accuracy: Option<f64>,
    pub count: usize,
}

/// Equal-width bins over [0, 1], right-closed except the first bin which
/// also includes 0.
pub fn reliability_bins(
    p: &[f64],
    y: &[u8],
    n_bins: usize,
) -> Result<Vec<ReliabilityBin>, EvalError> {
    check_lengths(p, y)?;
    assert!(n_bins >= 1, "need at least one bin");
    let width = 1.0 / n_bins as f64;
    let mut conf_sum = alloc::vec![0.0f64; n_bins];
    let mut label_sum = alloc::vec![0.0f64; n_bins];
    let mut count = alloc::vec![0usize; n_bins];
    for (pi, yi) in p.iter().zip(y.iter()) {
        let raw = math::ceil(pi * n_bins as f64) as usize;
        let bin = raw.saturating_sub(1).min(n_bins - 1);
        conf_sum[bin] += pi;
        label_sum[bin] += f64::from(*yi);
        count[bin] += 1;
    }
    Ok((0..n_bins)
        .map(|b| {
            let n = count[b];
            ReliabilityBin {
                bin_low: b as f64 * width,
                bin_high: (b + 1) as f64 * width,
                mean_confidence: (n > 0).then(|| conf_sum[b] / n as f64),
                accuracy: (n > 0).then(|| label_sum[b] / n as f64),
                count: n,
            }
        })
        .collect())
}

/// Recomposes the expected calibration error from a bin table.
pub fn ece_from_bins(bins: &[ReliabilityBin]) -> f64 {
    let n: usize = bins.iter().map(|b| b.count).sum();
    if n == 0 {
        return 0.0;
    }
    bins.iter()
        .filter(|b| b.count > 0)
        .map(|b| {
            let gap = math::abs(b.accuracy.unwrap() - b.mean_confidence.unwrap());
            (b.count as f64 / n as f64) * gap
        })
        .sum()
}

/// Expected calibration error: bin-weighted gap between empirical accuracy
/// and mean confidence.
pub fn ece(p: &[f64], y: &[u8], n_bins: usize) -> Result<f64, EvalError> {
    Ok(ece_from_bins(&reliability_bins(p, y, n_bins)?))
}

/// Default bin count for calibration summaries.
pub const DEFAULT_ECE_BINS: usize = 10;

/// The full metric set over one evaluation split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub auc: f64,
    pub brier: f64,
    pub ece: f64,
    pub bins: Vec<ReliabilityBin>,
}

impl EvalReport {
    /// Computes every metric at threshold 0.5 with the default ECE bins.
    /// A single-class split has no ranking information, so its AUC is
    /// reported as the tie value 0.5.
    pub fn compute(p: &[f64], y: &[u8]) -> Result<EvalReport, EvalError> {
        check_lengths(p, y)?;
        let bins = reliability_bins(p, y, DEFAULT_ECE_BINS)?;
        Ok(EvalReport {
            n: p.len(),
            accuracy: accuracy(p, y, 0.5)?,
            auc: match auc(p, y) {
                Ok(a) => a,
                Err(EvalError::SingleClass) => 0.5,
                Err(e) => return Err(e),
            },
            brier: brier(p, y)?,
            ece: ece_from_bins(&bins),
            bins,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(n²) pairwise oracle with half credit for ties.
    fn auc_brute_force(p: &[f64], y: &[u8]) -> f64 {
        let mut credit = 0.0;
        let mut pairs = 0u64;
        for (i, yi) in y.iter().enumerate() {
            if *yi != 1 {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if *yj != 0 {
                    continue;
                }
                pairs += 1;
                if p[i] > p[j] {
                    credit += 1.0;
                } else if p[i] == p[j] {
                    credit += 0.5;
                }
            }
        }
        credit / pairs as f64
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0.0, 1.0, 1.0], &[0, 1, 1], 0.5).unwrap(), 1.0);
        // Ties at the threshold predict class 1.
        assert_eq!(
            accuracy(&[0.5, 0.5, 0.5, 0.5], &[1, 1, 0, 0], 0.5).unwrap(),
            0.5
        );
        assert_eq!(accuracy(&[], &[], 0.5).unwrap_err(), EvalError::EmptyInput);
    }

    #[test]
    fn accuracy_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p: Vec<f64> = (0..101).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<u8> = (0..101).map(|_| u8::from(rng.gen::<bool>())).collect();
        let mut correct = 0;
        for i in 0..p.len() {
            let pred = if p[i] >= 0.5 { 1 } else { 0 };
            if pred == y[i] {
                correct += 1;
            }
        }
        assert_eq!(accuracy(&p, &y, 0.5).unwrap(), correct as f64 / 101.0);
    }

    #[test]
    fn auc_three_sample_case() {
        // Positives {0.9, 0.3}, negative {0.8}: one concordant pair of two.
        let a = auc(&[0.9, 0.8, 0.3], &[1, 0, 1]).unwrap();
        assert_eq!(a, 0.5);
    }

    #[test]
    fn auc_perfect_and_tied() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(auc(&[0.4, 0.4, 0.4], &[0, 1, 0]).unwrap(), 0.5);
    }

    #[test]
    fn auc_rejects_single_class() {
        assert_eq!(
            auc(&[0.3, 0.7], &[1, 1]).unwrap_err(),
            EvalError::SingleClass
        );
    }

    #[test]
    fn auc_equals_brute_force_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..30 {
            let n = rng.gen_range(2..200);
            // Quantized probabilities inject plenty of ties.
            let p: Vec<f64> = (0..n)
                .map(|_| (rng.gen::<f64>() * 20.0).round() / 20.0)
                .collect();
            let mut y: Vec<u8> = (0..n).map(|_| u8::from(rng.gen::<bool>())).collect();
            y[0] = 1;
            y[n - 1] = 0;
            let fast = auc(&p, &y).unwrap();
            let slow = auc_brute_force(&p, &y);
            assert_eq!(fast, slow, "trial {trial} mismatch");
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let p: Vec<f64> = (0..80).map(|_| rng.gen::<f64>()).collect();
        let mut y: Vec<u8> = (0..80).map(|_| u8::from(rng.gen::<bool>())).collect();
        y[0] = 1;
        y[1] = 0;
        let base = auc(&p, &y).unwrap();
        let cubed: Vec<f64> = p.iter().map(|v| v * v * v).collect();
        let logistic: Vec<f64> = p
            .iter()
            .map(|v| 1.0 / (1.0 + (-(5.0 * v - 2.0)).exp()))
            .collect();
        assert!((auc(&cubed, &y).unwrap() - base).abs() < 1e-12);
        assert!((auc(&logistic, &y).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn auc_complement_identity_without_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p: Vec<f64> = (0..60).map(|_| rng.gen::<f64>()).collect();
        let mut y: Vec<u8> = (0..60).map(|_| u8::from(rng.gen::<bool>())).collect();
        y[10] = 1;
        y[11] = 0;
        let flipped: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
        let sum = auc(&p, &y).unwrap() + auc(&flipped, &y).unwrap();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ece_two_bin_hand_case() {
        let e = ece(&[0.2, 0.2, 0.8, 0.8], &[0, 0, 1, 1], 2).unwrap();
        assert!((e - 0.2).abs() < 1e-12, "ece {e}");
    }

    #[test]
    fn ece_perfectly_calibrated_bins() {
        // Bin [0,0.5]: conf mean 0.25, accuracy 1/4; bin (0.5,1]: conf
        // mean 0.75, accuracy 3/4.
        let p = [0.25, 0.25, 0.25, 0.25, 0.75, 0.75, 0.75, 0.75];
        let y = [1, 0, 0, 0, 1, 1, 1, 0];
        let e = ece(&p, &y, 2).unwrap();
        assert!(e.abs() < 1e-12);
    }

    #[test]
    fn ece_maximal_miscalibration() {
        let e = ece(&[1.0, 1.0, 1.0], &[0, 0, 0], 10).unwrap();
        assert_eq!(e, 1.0);
    }

    #[test]
    fn single_bin_reduces_to_means() {
        let p = [0.2, 0.4, 0.9];
        let y = [0, 1, 1];
        let bins = reliability_bins(&p, &y, 1).unwrap();
        assert_eq!(bins.len(), 1);
        let b = &bins[0];
        assert_eq!(b.count, 3);
        assert!((b.mean_confidence.unwrap() - 0.5).abs() < 1e-12);
        assert!((b.accuracy.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_bins_are_marked_undefined() {
        let bins = reliability_bins(&[0.05, 0.95], &[0, 1], 10).unwrap();
        let empties: Vec<&ReliabilityBin> = bins.iter().filter(|b| b.count == 0).collect();
        assert_eq!(empties.len(), 8);
        for b in empties {
            assert_eq!(b.mean_confidence, None);
            assert_eq!(b.accuracy, None);
        }
        let total: usize = bins.iter().map(|b| b.count).sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn bins_recompose_to_ece() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p: Vec<f64> = (0..500).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<u8> = p.iter().map(|v| u8::from(rng.gen::<f64>() < *v)).collect();
        let bins = reliability_bins(&p, &y, 10).unwrap();
        let direct = ece(&p, &y, 10).unwrap();
        assert_eq!(ece_from_bins(&bins), direct);
    }

    #[test]
    fn report_handles_single_class_with_tie_convention() {
        let report = EvalReport::compute(&[0.5, 0.5], &[1, 1]).unwrap();
        assert_eq!(report.auc, 0.5);
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.n, 2);
    }

    #[test]
    fn accuracy_is_orientation_independent_off_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        // Keep probabilities away from exactly 0.5 so the tie rule never
        // fires; then both orientations of each pair agree.
        let p: Vec<f64> = (0..50)
            .map(|_| {
                let v: f64 = rng.gen();
                if (v - 0.5).abs() < 1e-6 {
                    0.6
                } else {
                    v
                }
            })
            .collect();
        let y: Vec<u8> = (0..50).map(|_| u8::from(rng.gen::<bool>())).collect();
        let p_rev: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
        let y_rev: Vec<u8> = y.iter().map(|v| 1 - v).collect();
        assert_eq!(
            accuracy(&p, &y, 0.5).unwrap(),
            accuracy(&p_rev, &y_rev, 0.5).unwrap()
        );
    }
}
