//! All-pairs matchup enumeration for a target season.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{Gender, Season, TeamId};

/// An unordered pairing rendered as `SEASON_LOW_HIGH`, lower team id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchupId {
    pub season: Season,
    pub team_low: TeamId,
    pub team_high: TeamId,
}

impl MatchupId {
    pub fn new(season: Season, a: TeamId, b: TeamId) -> MatchupId {
        let (team_low, team_high) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        MatchupId {
            season,
            team_low,
            team_high,
        }
    }

    pub fn render(&self) -> String {
        alloc::format!("{}_{}_{}", self.season, self.team_low, self.team_high)
    }

    pub fn parse(s: &str) -> Option<MatchupId> {
        let mut parts = s.split('_');
        let season: Season = parts.next()?.parse().ok()?;
        let low: u32 = parts.next()?.parse().ok()?;
        let high: u32 = parts.next()?.parse().ok()?;
        if parts.next().is_some() || low >= high {
            return None;
        }
        Some(MatchupId {
            season,
            team_low: TeamId(low),
            team_high: TeamId(high),
        })
    }
}

impl fmt::Display for MatchupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_{}", self.season, self.team_low, self.team_high)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchupError {
    DuplicateTeam { gender: Gender, team: TeamId },
    OverlappingGenders { team: TeamId },
}

impl fmt::Display for MatchupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchupError::DuplicateTeam { gender, team } => {
                write!(f, "team {team} listed twice for {gender}")
            }
            MatchupError::OverlappingGenders { team } => {
                write!(f, "team {team} appears in both gender lists")
            }
        }
    }
}

impl core::error::Error for MatchupError {}

/// Every unordered pair within each gender, lower id first, in ascending
/// `(gender, team_low, team_high)` order.
pub fn enumerate_matchups(
    season: Season,
    teams_per_gender: &BTreeMap<Gender, Vec<TeamId>>,
) -> Result<Vec<(Gender, MatchupId)>, MatchupError> {
    let mut seen_anywhere: BTreeSet<TeamId> = BTreeSet::new();
    let mut out = Vec::new();
    for (gender, teams) in teams_per_gender {
        let mut sorted = teams.clone();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(MatchupError::DuplicateTeam {
                    gender: *gender,
                    team: pair[0],
                });
            }
        }
        for team in &sorted {
            if !seen_anywhere.insert(*team) {
                return Err(MatchupError::OverlappingGenders { team: *team });
            }
        }
        for i in 0..sorted.len() {
            for j in (i + 1)..sorted.len() {
                out.push((*gender, MatchupId::new(season, sorted[i], sorted[j])));
            }
        }
    }
    Ok(out)
}
