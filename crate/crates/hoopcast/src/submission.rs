//! The `ID,Pred` submission file: one row per possible matchup, fixed
//! six-decimal probabilities for reproducible diffs.

use std::io::Write;
use std::path::{Path, PathBuf};

use hoopcast_core::matchups::MatchupId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubmissionError {
    #[error("{ids} ids vs {probs} probabilities")]
    LengthMismatch { ids: usize, probs: usize },
    #[error("probability {value} for {id} outside (0, 1)")]
    OutOfRange { id: String, value: f64 },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} line {line}: malformed submission row")]
    Malformed { path: PathBuf, line: usize },
}

/// Writes the submission: header `ID,Pred`, probabilities rendered with
/// six decimals. Each probability is the predicted chance that the
/// lower-id team beats the higher-id team. With `clamp` set, values are
/// pinned into [0.001, 0.999]; otherwise anything outside (0, 1) is an
/// error.
pub fn write_submission(
    ids: &[MatchupId],
    probabilities: &[f64],
    path: &Path,
    clamp: bool,
) -> Result<(), SubmissionError> {
    if ids.len() != probabilities.len() {
        return Err(SubmissionError::LengthMismatch {
            ids: ids.len(),
            probs: probabilities.len(),
        });
    }
    let mut out = String::from("ID,Pred\n");
    for (id, p) in ids.iter().zip(probabilities.iter()) {
        let p = if clamp { p.clamp(0.001, 0.999) } else { *p };
        if !(p > 0.0 && p < 1.0) {
            return Err(SubmissionError::OutOfRange {
                id: id.render(),
                value: p,
            });
        }
        out.push_str(&format!("{},{p:.6}\n", id.render()));
    }
    let mut file = std::fs::File::create(path).map_err(|source| SubmissionError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(out.as_bytes())
        .map_err(|source| SubmissionError::Write {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a submission back; probabilities carry the six written decimals.
pub fn read_submission(path: &Path) -> Result<Vec<(MatchupId, f64)>, SubmissionError> {
    let content = std::fs::read_to_string(path).map_err(|source| SubmissionError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let malformed = || SubmissionError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
        };
        let (id_str, p_str) = line.split_once(',').ok_or_else(malformed)?;
        let id = MatchupId::parse(id_str).ok_or_else(malformed)?;
        let p: f64 = p_str.parse().map_err(|_| malformed())?;
        rows.push((id, p));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hoopcast_core::data::TeamId;

    #[test]
    fn single_pair_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("submission.csv");
        let ids = [MatchupId::new(2025, TeamId(1101), TeamId(1102))];
        write_submission(&ids, &[0.75], &path, false).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = content.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "ID,Pred");
        assert_eq!(lines[1], "2025_1101_1102,0.750000");
    }

    #[test]
    fn round_trip_preserves_six_decimals() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("submission.csv");
        let ids: Vec<MatchupId> = (0..5)
            .map(|i| MatchupId::new(2025, TeamId(1101 + i), TeamId(1200 + i)))
            .collect();
        let probs = [0.123456789, 0.5, 0.987654321, 0.000999, 0.25];
        write_submission(&ids, &probs, &path, true).unwrap();
        let rows = read_submission(&path).unwrap();
        assert_eq!(rows.len(), 5);
        for ((id, p), (orig_id, orig_p)) in rows.iter().zip(ids.iter().zip(probs.iter())) {
            assert_eq!(id, orig_id);
            let clamped = orig_p.clamp(0.001, 0.999);
            assert!((p - clamped).abs() < 5e-7, "{p} vs {clamped}");
        }
    }

    #[test]
    fn out_of_range_without_clamp_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("submission.csv");
        let ids = [MatchupId::new(2025, TeamId(1101), TeamId(1102))];
        let err = write_submission(&ids, &[1.0], &path, false).unwrap_err();
        assert!(matches!(err, SubmissionError::OutOfRange { .. }));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("submission.csv");
        let ids = [MatchupId::new(2025, TeamId(1101), TeamId(1102))];
        let err = write_submission(&ids, &[0.5, 0.6], &path, false).unwrap_err();
        assert!(matches!(
            err,
            SubmissionError::LengthMismatch { ids: 1, probs: 2 }
        ));
    }
}
