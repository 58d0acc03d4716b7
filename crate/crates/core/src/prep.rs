//! Game-row preparation: overtime normalization and perspective
//! symmetrization.
//!
//! Each overtime period adds five minutes to the 40-minute regulation game,
//! so counting stats from longer games are deflated by `40 / (40 + 5·OT)`
//! before any averaging. Every game is then emitted twice, once from each
//! team's perspective, which balances the labels exactly and removes the
//! winner/loser column orientation from the learning problem.

use alloc::vec::Vec;
use core::fmt;

use crate::data::{BoxLine, GameRecord, MatchRow};

/// Regulation game length in minutes.
const REGULATION_MINUTES: f64 = 40.0;

/// Minutes added per overtime period.
const OVERTIME_MINUTES: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrepError {
    /// A record failed [`GameRecord::validate`]; carries the game's position
    /// in the input.
    InvalidRecord { index: usize },
}

impl fmt::Display for PrepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrepError::InvalidRecord { index } => {
                write!(f, "game {index} violates a record invariant")
            }
        }
    }
}

impl core::error::Error for PrepError {}

/// Deflation factor mapping a game with `num_ot` overtime periods back to a
/// regulation-length equivalent. `num_ot = 0` gives exactly 1.
pub fn overtime_factor(num_ot: u8) -> f64 {
    REGULATION_MINUTES / (REGULATION_MINUTES + OVERTIME_MINUTES * f64::from(num_ot))
}

/// Scales a box line and score to regulation length.
pub fn overtime_scale(stats: &BoxLine, score: f64, num_ot: u8) -> (BoxLine, f64) {
    let factor = overtime_factor(num_ot);
    let mut scaled = *stats;
    for v in scaled.0.iter_mut() {
        *v *= factor;
    }
    (scaled, score * factor)
}

/// Converts games into directed match rows, two per game: the
/// winner-perspective row (label 1) first, then the mirrored loser
/// perspective (label 0). Stats and scores are overtime-scaled.
///
/// Input order is preserved, so the output is deterministic.
pub fn symmetrize(games: &[GameRecord]) -> Result<Vec<MatchRow>, PrepError> {
    let mut rows = Vec::with_capacity(games.len() * 2);
    for (index, game) in games.iter().enumerate() {
        if game.validate().is_err() {
            return Err(PrepError::InvalidRecord { index });
        }
        let (w_stats, w_score) = overtime_scale(
            &BoxLine::from(game.w_stats),
            f64::from(game.w_score),
            game.num_ot,
        );
        let (l_stats, l_score) = overtime_scale(
            &BoxLine::from(game.l_stats),
            f64::from(game.l_score),
            game.num_ot,
        );

        rows.push(MatchRow {
            season: game.season,
            day_num: game.day_num,
            gender: game.gender,
            source: game.source,
            t1: game.w_team,
            t2: game.l_team,
            t1_stats: w_stats,
            t2_stats: l_stats,
            t1_score: w_score,
            t2_score: l_score,
            label: 1,
        });
        rows.push(MatchRow {
            season: game.season,
            day_num: game.day_num,
            gender: game.gender,
            source: game.source,
            t1: game.l_team,
            t2: game.w_team,
            t1_stats: l_stats,
            t2_stats: w_stats,
            t1_score: l_score,
            t2_score: w_score,
            label: 0,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{BoxCounts, GameSource, Gender, Location, TeamId};

    fn game(w_score: u32, l_score: u32, num_ot: u8) -> GameRecord {
        GameRecord {
            season: 2023,
            day_num: 40,
            w_team: TeamId(1101),
            w_score,
            l_team: TeamId(1102),
            l_score,
            location: Location::Home,
            num_ot,
            gender: Gender::Men,
            source: GameSource::RegularSeason,
            w_stats: BoxCounts([28, 60, 8, 22, 14, 20, 10, 25, 15, 12, 6, 4, 18]),
            l_stats: BoxCounts([26, 58, 6, 20, 12, 16, 9, 23, 13, 14, 5, 3, 17]),
        }
    }

    #[test]
    fn one_overtime_maps_45_points_to_40() {
        let line = BoxLine([0.0; 13]);
        let (_, score) = overtime_scale(&line, 45.0, 1);
        assert!((score - 40.0).abs() < 1e-12);
    }

    #[test]
    fn regulation_game_is_identity() {
        let line = BoxLine::from(BoxCounts([28, 60, 8, 22, 14, 20, 10, 25, 15, 12, 6, 4, 18]));
        let (scaled, score) = overtime_scale(&line, 78.0, 0);
        assert_eq!(scaled, line);
        assert_eq!(score, 78.0);
    }

    #[test]
    fn double_overtime_factor() {
        // 40 / (40 + 5*2) = 0.8
        let line = BoxLine([0.0; 13]);
        let (_, score) = overtime_scale(&line, 90.0, 2);
        assert!((score - 72.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_never_inflates() {
        let line = BoxLine::from(BoxCounts([28, 60, 8, 22, 14, 20, 10, 25, 15, 12, 6, 4, 18]));
        for ot in 1..=4u8 {
            let (scaled, _) = overtime_scale(&line, 80.0, ot);
            for (s, raw) in scaled.0.iter().zip(line.0.iter()) {
                assert!(s <= raw);
                assert!(*s >= 0.0);
            }
        }
    }

    #[test]
    fn one_game_gives_mirrored_pair() {
        let rows = symmetrize(&[game(78, 70, 0)]).unwrap();
        assert_eq!(rows.len(), 2);
        let (w, l) = (&rows[0], &rows[1]);
        assert_eq!(w.label, 1);
        assert_eq!(l.label, 0);
        assert_eq!(w.t1, l.t2);
        assert_eq!(w.t2, l.t1);
        assert_eq!(w.t1_stats, l.t2_stats);
        assert_eq!(w.t1_score, l.t2_score);
        assert_eq!(w.point_diff(), -l.point_diff());
    }

    #[test]
    fn empty_input_gives_empty_output() {
        assert!(symmetrize(&[]).unwrap().is_empty());
    }

    #[test]
    fn label_mean_is_exactly_half() {
        let games = [game(78, 70, 0), game(64, 60, 1), game(101, 95, 2)];
        let rows = symmetrize(&games).unwrap();
        assert_eq!(rows.len(), 6);
        let sum: u32 = rows.iter().map(|r| u32::from(r.label)).sum();
        assert_eq!(sum * 2, rows.len() as u32);
    }

    #[test]
    fn invalid_game_is_rejected_with_index() {
        let bad = game(70, 78, 0);
        let err = symmetrize(&[game(80, 70, 0), bad]).unwrap_err();
        assert_eq!(err, PrepError::InvalidRecord { index: 1 });
    }

    #[test]
    fn label_matches_point_diff_sign() {
        let rows = symmetrize(&[game(78, 70, 0), game(90, 80, 1)]).unwrap();
        for r in &rows {
            assert_eq!(r.label == 1, r.point_diff() > 0.0);
        }
    }
}
