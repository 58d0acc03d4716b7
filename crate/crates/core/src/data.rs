//! Domain records shared across the pipeline.

use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Tournament year, e.g. 2024.
pub type Season = u16;

/// Day index within a season (0 = season start).
pub type DayNum = u16;

/// Numeric team identifier as used by the competition data files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TeamId(pub u32);

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Division tag; men's and women's data are kept separate end to end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Men,
    Women,
}

impl Gender {
    /// Numeric encoding used when the division enters the model as a feature.
    pub fn as_feature(self) -> f64 {
        match self {
            Gender::Men => 0.0,
            Gender::Women => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "men" | "M" | "m" => Some(Gender::Men),
            "women" | "W" | "w" => Some(Gender::Women),
            _ => None,
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gender::Men => write!(f, "men"),
            Gender::Women => write!(f, "women"),
        }
    }
}

/// Which result file a game came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameSource {
    RegularSeason,
    Tournament,
}

/// Winner location column; parsed for completeness, unused by the models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    Home,
    Away,
    Neutral,
}

/// Number of per-game counting statistics tracked for each team.
pub const BOX_STAT_COUNT: usize = 13;

/// Column name stems in file order (winner columns carry a `W` prefix,
/// loser columns an `L` prefix).
pub const BOX_STAT_NAMES: [&str; BOX_STAT_COUNT] = [
    "FGM", "FGA", "FGM3", "FGA3", "FTM", "FTA", "OR", "DR", "Ast", "TO", "Stl", "Blk", "PF",
];

/// Raw per-game counting statistics, in [`BOX_STAT_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxCounts(pub [u32; BOX_STAT_COUNT]);

impl BoxCounts {
    pub fn fgm(&self) -> u32 {
        self.0[0]
    }
    pub fn fga(&self) -> u32 {
        self.0[1]
    }
    pub fn fgm3(&self) -> u32 {
        self.0[2]
    }
    pub fn fga3(&self) -> u32 {
        self.0[3]
    }
    pub fn ftm(&self) -> u32 {
        self.0[4]
    }
    pub fn fta(&self) -> u32 {
        self.0[5]
    }

    /// Shot-attempt sanity: made field goals, threes, and free throws can
    /// never exceed the corresponding attempts.
    pub fn shot_consistency(&self) -> Result<(), (&'static str, u32, u32)> {
        for (stem, made, att) in [
            ("FGM/FGA", self.fgm(), self.fga()),
            ("FGM3/FGA3", self.fgm3(), self.fga3()),
            ("FTM/FTA", self.ftm(), self.fta()),
        ] {
            if made > att {
                return Err((stem, made, att));
            }
        }
        Ok(())
    }
}

/// Real-valued box line, produced by overtime scaling of [`BoxCounts`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxLine(pub [f64; BOX_STAT_COUNT]);

impl From<BoxCounts> for BoxLine {
    fn from(c: BoxCounts) -> Self {
        let mut v = [0.0; BOX_STAT_COUNT];
        for (out, raw) in v.iter_mut().zip(c.0.iter()) {
            *out = f64::from(*raw);
        }
        BoxLine(v)
    }
}

/// One historical game, winner/loser oriented as in the source files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub season: Season,
    pub day_num: DayNum,
    pub w_team: TeamId,
    pub w_score: u32,
    pub l_team: TeamId,
    pub l_score: u32,
    pub location: Location,
    pub num_ot: u8,
    pub gender: Gender,
    pub source: GameSource,
    pub w_stats: BoxCounts,
    pub l_stats: BoxCounts,
}

/// A violated [`GameRecord`] invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordInvariant {
    WinnerScoreNotGreater {
        w_score: u32,
        l_score: u32,
    },
    SameTeams(TeamId),
    MadeExceedsAttempted {
        stat: &'static str,
        made: u32,
        attempted: u32,
    },
}

impl fmt::Display for RecordInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordInvariant::WinnerScoreNotGreater { w_score, l_score } => write!(
                f,
                "winner score not greater than loser score ({w_score} vs {l_score})"
            ),
            RecordInvariant::SameTeams(id) => write!(f, "winner and loser are both team {id}"),
            RecordInvariant::MadeExceedsAttempted {
                stat,
                made,
                attempted,
            } => write!(f, "{stat}: made {made} exceeds attempted {attempted}"),
        }
    }
}

impl core::error::Error for RecordInvariant {}

impl GameRecord {
    /// Checks the record invariants: winner defined by score, distinct
    /// teams, and shot-attempt consistency for both box lines.
    pub fn validate(&self) -> Result<(), RecordInvariant> {
        if self.w_score <= self.l_score {
            return Err(RecordInvariant::WinnerScoreNotGreater {
                w_score: self.w_score,
                l_score: self.l_score,
            });
        }
        if self.w_team == self.l_team {
            return Err(RecordInvariant::SameTeams(self.w_team));
        }
        for stats in [&self.w_stats, &self.l_stats] {
            if let Err((stat, made, attempted)) = stats.shot_consistency() {
                return Err(RecordInvariant::MadeExceedsAttempted {
                    stat,
                    made,
                    attempted,
                });
            }
        }
        Ok(())
    }
}

/// Tournament seed assignment for one team and season.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub season: Season,
    pub team: TeamId,
    /// Raw seed string, e.g. `W01` or `X16a` (region letter, two digits,
    /// optional play-in suffix).
    pub seed_str: String,
    /// Numeric portion of `seed_str`, 1..=16.
    pub seed_num: u8,
    pub gender: Gender,
}

impl SeedEntry {
    /// Extracts the numeric seed from a raw seed string, ignoring the region
    /// prefix and any play-in suffix. Returns `None` when the string holds
    /// no digits or the value falls outside 1..=16.
    pub fn parse_seed_num(seed_str: &str) -> Option<u8> {
        let digits: String = seed_str.chars().filter(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return None;
        }
        let n: u32 = digits.parse().ok()?;
        if (1..=16).contains(&n) {
            Some(n as u8)
        } else {
            None
        }
    }
}

/// One directed (team 1 vs team 2) game row after overtime normalization.
///
/// Every source game yields exactly two of these with the team fields
/// swapped; labels over a symmetrized set are balanced by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub season: Season,
    pub day_num: DayNum,
    pub gender: Gender,
    pub source: GameSource,
    pub t1: TeamId,
    pub t2: TeamId,
    pub t1_stats: BoxLine,
    pub t2_stats: BoxLine,
    pub t1_score: f64,
    pub t2_score: f64,
    /// 1 when team 1 won, 0 otherwise.
    pub label: u8,
}

impl MatchRow {
    /// Scaled score margin from team 1's perspective. Feeds the team-quality
    /// regression target only; outcome-dependent, so it is never exported as
    /// a model feature.
    pub fn point_diff(&self) -> f64 {
        self.t1_score - self.t2_score
    }
}
