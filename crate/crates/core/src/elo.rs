//! Sequential Elo ratings over season game logs.
//!
//! Ratings start at a configurable baseline, move after every game by
//! `K · (actual − expected)` where the expected score is the logistic
//! `1 / (1 + base^((r_b − r_a)/scale))`, and are read out at season's end.
//! A game moves both teams by opposite amounts, so the rating sum over a
//! season's teams is invariant.

use alloc::collections::BTreeMap;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{Gender, MatchRow, Season, TeamId};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloConfig {
    /// Rating assigned to a team at its first appearance in a season.
    pub base_rating: f64,
    /// Update sensitivity.
    pub k_factor: f64,
    /// Rating-gap scale in the expected-score logistic.
    pub scale: f64,
    /// Base of the expected-score logistic.
    pub logistic_base: f64,
    /// When set, a team's final rating from the previous season seeds the
    /// next one instead of `base_rating`.
    pub carry_over: bool,
}

impl Default for EloConfig {
    fn default() -> Self {
        EloConfig {
            base_rating: 1000.0,
            k_factor: 100.0,
            scale: 400.0,
            logistic_base: 10.0,
            carry_over: false,
        }
    }
}

/// End-of-season ratings keyed by `(gender, season, team)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EloTable {
    pub ratings: BTreeMap<(Gender, Season, TeamId), f64>,
    /// Baseline used when a team is absent from the table.
    pub base_rating: f64,
}

impl EloTable {
    /// Final rating for a team-season, or the baseline when the team played
    /// no rated games that season.
    pub fn rating_or_base(&self, gender: Gender, season: Season, team: TeamId) -> f64 {
        self.ratings
            .get(&(gender, season, team))
            .copied()
            .unwrap_or(self.base_rating)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EloError {
    /// Rows must arrive sorted by `(season, day_num)`; carries the first
    /// out-of-order row index.
    UnsortedRows { index: usize },
}

impl fmt::Display for EloError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EloError::UnsortedRows { index } => {
                write!(
                    f,
                    "rows are not sorted by (season, day_num) at index {index}"
                )
            }
        }
    }
}

impl core::error::Error for EloError {}

/// Expected score for a team rated `r_a` against one rated `r_b`;
/// strictly inside (0, 1) for finite ratings.
pub fn elo_expected(r_a: f64, r_b: f64, cfg: &EloConfig) -> f64 {
    1.0 / (1.0 + math::powf(cfg.logistic_base, (r_b - r_a) / cfg.scale))
}

/// Post-game rating: `r + K · (actual − expected)`.
pub fn elo_update(r: f64, actual: f64, expected: f64, cfg: &EloConfig) -> f64 {
    r + cfg.k_factor * (actual - expected)
}

/// Runs the rating recurrence over a chronologically sorted game log (one
/// row per game, team 1 = winner perspective expected but any consistent
/// single-perspective stream works: `label` is team 1's actual score).
///
/// Ratings reset at each season boundary unless `cfg.carry_over` is set.
/// The returned table holds each team's final rating for every season it
/// appeared in.
pub fn compute_elo(rows: &[MatchRow], cfg: &EloConfig) -> Result<EloTable, EloError> {
    assert!(
        cfg.k_factor > 0.0 && cfg.scale > 0.0,
        "elo config needs positive k ({}) and scale ({})",
        cfg.k_factor,
        cfg.scale
    );
    for (index, pair) in rows.windows(2).enumerate() {
        let a = (pair[0].season, pair[0].day_num);
        let b = (pair[1].season, pair[1].day_num);
        if b < a {
            return Err(EloError::UnsortedRows { index: index + 1 });
        }
    }

    let mut table = EloTable {
        ratings: BTreeMap::new(),
        base_rating: cfg.base_rating,
    };
    // Live ratings for the season currently being processed.
    let mut current: BTreeMap<(Gender, TeamId), f64> = BTreeMap::new();
    let season_of = |current: &mut BTreeMap<(Gender, TeamId), f64>,
                     table: &EloTable,
                     gender: Gender,
                     season: Season,
                     team: TeamId| {
        *current.entry((gender, team)).or_insert_with(|| {
            if cfg.carry_over {
                if let Some(prev) = table
                    .ratings
                    .range((gender, 0, team)..(gender, season, team))
                    .rfind(|((_, _, t), _)| *t == team)
                {
                    return *prev.1;
                }
            }
            cfg.base_rating
        })
    };

    let mut active_season: Option<Season> = None;
    for row in rows {
        if active_season != Some(row.season) {
            // Season boundary: flush live ratings as that season's finals.
            if let Some(prev_season) = active_season {
                for ((gender, team), rating) in &current {
                    table.ratings.insert((*gender, prev_season, *team), *rating);
                }
            }
            current.clear();
            active_season = Some(row.season);
        }

        let r1 = season_of(&mut current, &table, row.gender, row.season, row.t1);
        let r2 = season_of(&mut current, &table, row.gender, row.season, row.t2);
        let expected1 = elo_expected(r1, r2, cfg);
        let actual1 = f64::from(row.label);
        let new1 = elo_update(r1, actual1, expected1, cfg);
        let new2 = elo_update(r2, 1.0 - actual1, 1.0 - expected1, cfg);
        current.insert((row.gender, row.t1), new1);
        current.insert((row.gender, row.t2), new2);
    }
    if let Some(season) = active_season {
        for ((gender, team), rating) in &current {
            table.ratings.insert((*gender, season, *team), *rating);
        }
    }
    Ok(table)
}
