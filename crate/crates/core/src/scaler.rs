//! Column standardization fitted on the training partition only.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::features::MatchupSample;
use crate::math;

/// Per-column mean/std transform. Constructed only by [`Scaler::fit`], so a
/// transform can never run with unfitted statistics. Columns with zero
/// variance keep std 1 and pass through unchanged (up to centering).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalerError {
    EmptyFit,
    DimMismatch { fitted: usize, got: usize },
}

impl fmt::Display for ScalerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalerError::EmptyFit => write!(f, "cannot fit a scaler on zero samples"),
            ScalerError::DimMismatch { fitted, got } => {
                write!(f, "scaler fitted for {fitted} columns, sample has {got}")
            }
        }
    }
}

impl core::error::Error for ScalerError {}

impl Scaler {
    /// Fits column statistics over every team row of the training samples
    /// (each sample contributes its two rows). Uses the population standard
    /// deviation; zero-variance columns are guarded to std 1.
    pub fn fit(samples: &[MatchupSample]) -> Result<Scaler, ScalerError> {
        let Some(first) = samples.first() else {
            return Err(ScalerError::EmptyFit);
        };
        let d = first.x.cols();
        let n_rows = (samples.len() * 2) as f64;

        let mut means = alloc::vec![0.0; d];
        for s in samples {
            for r in 0..2 {
                for (m, v) in means.iter_mut().zip(s.x.row(r).iter()) {
                    *m += v;
                }
            }
        }
        for m in means.iter_mut() {
            *m /= n_rows;
        }

        let mut vars = alloc::vec![0.0; d];
        for s in samples {
            for r in 0..2 {
                for ((var, mean), v) in vars.iter_mut().zip(means.iter()).zip(s.x.row(r).iter()) {
                    let delta = v - mean;
                    *var += delta * delta;
                }
            }
        }
        let stds = vars
            .iter()
            .map(|v| {
                let s = math::sqrt(v / n_rows);
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();

        Ok(Scaler { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Standardizes the columns of a feature matrix in place.
    pub fn apply_matrix(&self, x: &mut crate::tensor::Tensor2) -> Result<(), ScalerError> {
        if x.cols() != self.dim() {
            return Err(ScalerError::DimMismatch {
                fitted: self.dim(),
                got: x.cols(),
            });
        }
        for r in 0..x.rows() {
            for (c, v) in x.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.means[c]) / self.stds[c];
            }
        }
        Ok(())
    }

    /// Standardizes one sample in place.
    pub fn apply(&self, sample: &mut MatchupSample) -> Result<(), ScalerError> {
        self.apply_matrix(&mut sample.x)
    }

    /// Standardizes a whole partition with these (training) statistics.
    pub fn apply_all(&self, samples: &mut [MatchupSample]) -> Result<(), ScalerError> {
        for s in samples.iter_mut() {
            self.apply(s)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Gender, TeamId};
    use crate::features::SampleMeta;
    use crate::tensor::Tensor2;
    use alloc::vec;
    use alloc::vec::Vec;

    fn sample(rows: [Vec<f64>; 2]) -> MatchupSample {
        let d = rows[0].len();
        let mut data = rows[0].clone();
        data.extend_from_slice(&rows[1]);
        MatchupSample {
            x: Tensor2::from_vec(2, d, data),
            label: Some(1),
            meta: SampleMeta {
                season: 2020,
                gender: Gender::Men,
                t1: TeamId(1),
                t2: TeamId(2),
            },
        }
    }

    #[test]
    fn two_point_column_maps_to_unit_values() {
        let mut samples = vec![sample([vec![0.0], vec![2.0]])];
        let scaler = Scaler::fit(&samples).unwrap();
        scaler.apply_all(&mut samples).unwrap();
        assert_eq!(samples[0].x.row(0), &[-1.0]);
        assert_eq!(samples[0].x.row(1), &[1.0]);
    }

    #[test]
    fn constant_column_is_centered_but_not_divided() {
        let mut samples = vec![
            sample([vec![3.0, 1.0], vec![3.0, 5.0]]),
            sample([vec![3.0, 9.0], vec![3.0, 1.0]]),
        ];
        let scaler = Scaler::fit(&samples).unwrap();
        assert_eq!(scaler.stds[0], 1.0);
        scaler.apply_all(&mut samples).unwrap();
        for s in &samples {
            for r in 0..2 {
                assert_eq!(s.x.row(r)[0], 0.0);
            }
        }
    }

    #[test]
    fn transformed_training_columns_are_standardized() {
        let mut samples: Vec<MatchupSample> = (0..50)
            .map(|i| {
                let v = i as f64;
                sample([vec![v, 2.0 * v + 1.0], vec![v * 0.5 - 3.0, v]])
            })
            .collect();
        let scaler = Scaler::fit(&samples).unwrap();
        scaler.apply_all(&mut samples).unwrap();
        let n = (samples.len() * 2) as f64;
        for c in 0..2 {
            let mean: f64 = samples
                .iter()
                .flat_map(|s| [s.x.get(0, c), s.x.get(1, c)])
                .sum::<f64>()
                / n;
            let var: f64 = samples
                .iter()
                .flat_map(|s| [s.x.get(0, c), s.x.get(1, c)])
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / n;
            assert!(mean.abs() < 1e-9, "column {c} mean {mean}");
            assert!((var - 1.0).abs() < 1e-6, "column {c} var {var}");
        }
    }

    #[test]
    fn validation_uses_training_statistics() {
        let train = vec![sample([vec![0.0], vec![2.0]])];
        let scaler = Scaler::fit(&train).unwrap();
        let mut val = sample([vec![4.0], vec![6.0]]);
        scaler.apply(&mut val).unwrap();
        // Training stats: mean 1, std 1 — not the validation sample's own.
        assert_eq!(val.x.row(0), &[3.0]);
        assert_eq!(val.x.row(1), &[5.0]);
    }

    #[test]
    fn empty_fit_is_an_error() {
        assert_eq!(Scaler::fit(&[]).unwrap_err(), ScalerError::EmptyFit);
    }

    #[test]
    fn dim_mismatch_is_an_error() {
        let scaler = Scaler::fit(&[sample([vec![0.0], vec![2.0]])]).unwrap();
        let mut bad = sample([vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert!(matches!(
            scaler.apply(&mut bad),
            Err(ScalerError::DimMismatch { fitted: 1, got: 2 })
        ));
    }
}
