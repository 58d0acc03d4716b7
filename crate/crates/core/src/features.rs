//! Feature tiers and model-input assembly.
//!
//! Three tiers feed the forecasters: tournament seeds (with the seed
//! difference helper), Elo ratings and regression qualities, and per-team
//! box-score season averages. Lookup misses are imputed with the neutral
//! values used throughout the pipeline: the season's median seed, the Elo
//! baseline, a quality of zero, and the league-average box line.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{Gender, MatchRow, Season, SeedEntry, TeamId, BOX_STAT_COUNT};
use crate::elo::EloTable;
use crate::glm::QualityTable;
use crate::tensor::Tensor2;

/// Named feature blocks; ablation removes whole blocks by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    /// Tournament seed number (median-imputed).
    Seed,
    /// End-of-season Elo rating.
    Elo,
    /// Regression team quality.
    Quality,
    /// Division flag, identical on both team rows.
    Gender,
    /// The 13 box-score season averages.
    Box,
}

impl FeatureGroup {
    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Seed => "seed",
            FeatureGroup::Elo => "elo",
            FeatureGroup::Quality => "quality",
            FeatureGroup::Gender => "gender",
            FeatureGroup::Box => "box",
        }
    }

    pub fn parse(name: &str) -> Result<FeatureGroup, FeatureError> {
        match name {
            "seed" => Ok(FeatureGroup::Seed),
            "elo" => Ok(FeatureGroup::Elo),
            "quality" => Ok(FeatureGroup::Quality),
            "gender" => Ok(FeatureGroup::Gender),
            "box" => Ok(FeatureGroup::Box),
            other => Err(FeatureError::UnknownGroup(String::from(other))),
        }
    }

    /// Number of per-team columns the group contributes.
    pub fn width(self) -> usize {
        match self {
            FeatureGroup::Box => BOX_STAT_COUNT,
            _ => 1,
        }
    }

    /// The configuration used for the headline experiments: seeds, Elo,
    /// quality, and the division flag (box averages are off by default).
    pub fn default_set() -> Vec<FeatureGroup> {
        alloc::vec![
            FeatureGroup::Seed,
            FeatureGroup::Elo,
            FeatureGroup::Quality,
            FeatureGroup::Gender,
        ]
    }

    pub fn full_set() -> Vec<FeatureGroup> {
        alloc::vec![
            FeatureGroup::Seed,
            FeatureGroup::Elo,
            FeatureGroup::Quality,
            FeatureGroup::Gender,
            FeatureGroup::Box,
        ]
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-team row width for an ordered group list.
pub fn feature_dim(groups: &[FeatureGroup]) -> usize {
    groups.iter().map(|g| g.width()).sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureError {
    UnknownGroup(String),
    EmptyFeatureSet,
}

impl fmt::Display for FeatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureError::UnknownGroup(name) => write!(f, "unknown feature group '{name}'"),
            FeatureError::EmptyFeatureSet => write!(f, "feature set is empty"),
        }
    }
}

impl core::error::Error for FeatureError {}

/// Seed assignments keyed by `(gender, season, team)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTable {
    pub seeds: BTreeMap<(Gender, Season, TeamId), u8>,
}

impl SeedTable {
    pub fn from_entries(entries: &[SeedEntry]) -> SeedTable {
        let mut seeds = BTreeMap::new();
        for e in entries {
            seeds.insert((e.gender, e.season, e.team), e.seed_num);
        }
        SeedTable { seeds }
    }

    pub fn get(&self, gender: Gender, season: Season, team: TeamId) -> Option<u8> {
        self.seeds.get(&(gender, season, team)).copied()
    }
}

/// Per-team season averages of the 13 box statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxAverages {
    pub avgs: [f64; BOX_STAT_COUNT],
    pub games_played: u32,
}

/// Averages each team's own (team 1 perspective) box line over `rows`.
///
/// Expects rows from a single `(gender, season)`; with a symmetrized set
/// every game contributes exactly one row per participating team.
pub fn season_box_averages(rows: &[MatchRow]) -> BTreeMap<TeamId, BoxAverages> {
    let mut sums: BTreeMap<TeamId, ([f64; BOX_STAT_COUNT], u32)> = BTreeMap::new();
    for row in rows {
        let entry = sums.entry(row.t1).or_insert(([0.0; BOX_STAT_COUNT], 0));
        for (acc, v) in entry.0.iter_mut().zip(row.t1_stats.0.iter()) {
            *acc += v;
        }
        entry.1 += 1;
    }
    sums.into_iter()
        .map(|(team, (sum, n))| {
            let mut avgs = sum;
            for v in avgs.iter_mut() {
                *v /= f64::from(n);
            }
            (
                team,
                BoxAverages {
                    avgs,
                    games_played: n,
                },
            )
        })
        .collect()
}

/// Seed difference from team 1's perspective: positive means team 1 holds
/// the better (numerically lower) seed.
pub fn seed_diff(seed_t1: i32, seed_t2: i32) -> i32 {
    seed_t2 - seed_t1
}

/// A team's feature row after imputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSeasonFeature {
    pub seed_num: f64,
    pub seed_imputed: bool,
    pub elo: f64,
    pub quality: f64,
    pub box_avgs: [f64; BOX_STAT_COUNT],
    pub games_played: u32,
}

/// All fitted feature tables for some set of seasons, plus the cached
/// imputation statistics (per-season median seed, league-mean box line).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureTables {
    pub seeds: SeedTable,
    pub elo: EloTable,
    pub quality: QualityTable,
    pub box_avgs: BTreeMap<(Gender, Season, TeamId), BoxAverages>,
    seed_medians: BTreeMap<(Gender, Season), f64>,
    box_means: BTreeMap<(Gender, Season), [f64; BOX_STAT_COUNT]>,
}

/// Fallback when a season has no seeded teams at all: the midpoint of the
/// 1..=16 seed range.
const SEED_RANGE_MIDPOINT: f64 = 8.5;

impl FeatureTables {
    pub fn new(
        seeds: SeedTable,
        elo: EloTable,
        quality: QualityTable,
        box_avgs: BTreeMap<(Gender, Season, TeamId), BoxAverages>,
    ) -> FeatureTables {
        let mut by_season: BTreeMap<(Gender, Season), Vec<u8>> = BTreeMap::new();
        for ((gender, season, _), seed) in &seeds.seeds {
            by_season.entry((*gender, *season)).or_default().push(*seed);
        }
        let seed_medians = by_season
            .into_iter()
            .map(|(key, mut vals)| {
                vals.sort_unstable();
                let n = vals.len();
                let median = if n % 2 == 1 {
                    f64::from(vals[n / 2])
                } else {
                    (f64::from(vals[n / 2 - 1]) + f64::from(vals[n / 2])) / 2.0
                };
                (key, median)
            })
            .collect();

        let mut box_sums: BTreeMap<(Gender, Season), ([f64; BOX_STAT_COUNT], u32)> =
            BTreeMap::new();
        for ((gender, season, _), avgs) in &box_avgs {
            let entry = box_sums
                .entry((*gender, *season))
                .or_insert(([0.0; BOX_STAT_COUNT], 0));
            for (acc, v) in entry.0.iter_mut().zip(avgs.avgs.iter()) {
                *acc += v;
            }
            entry.1 += 1;
        }
        let box_means = box_sums
            .into_iter()
            .map(|(key, (sum, n))| {
                let mut mean = sum;
                for v in mean.iter_mut() {
                    *v /= f64::from(n);
                }
                (key, mean)
            })
            .collect();

        FeatureTables {
            seeds,
            elo,
            quality,
            box_avgs,
            seed_medians,
            box_means,
        }
    }

    /// Median seed over the season's seeded teams of the same gender.
    pub fn median_seed(&self, gender: Gender, season: Season) -> f64 {
        self.seed_medians
            .get(&(gender, season))
            .copied()
            .unwrap_or(SEED_RANGE_MIDPOINT)
    }

    /// One team's feature row, imputing every missing table entry.
    pub fn team_features(&self, gender: Gender, season: Season, team: TeamId) -> TeamSeasonFeature {
        let seed = self.seeds.get(gender, season, team);
        let (box_avgs, games_played) = match self.box_avgs.get(&(gender, season, team)) {
            Some(b) => (b.avgs, b.games_played),
            None => (
                self.box_means
                    .get(&(gender, season))
                    .copied()
                    .unwrap_or([0.0; BOX_STAT_COUNT]),
                0,
            ),
        };
        TeamSeasonFeature {
            seed_num: seed
                .map(f64::from)
                .unwrap_or_else(|| self.median_seed(gender, season)),
            seed_imputed: seed.is_none(),
            elo: self.elo.rating_or_base(gender, season, team),
            quality: self.quality.quality_or_zero(gender, season, team),
            box_avgs,
            games_played,
        }
    }
}

/// Identifying info carried alongside a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub season: Season,
    pub gender: Gender,
    pub t1: TeamId,
    pub t2: TeamId,
}

/// One model input: a 2×d matrix (row 0 = team 1, row 1 = team 2) with an
/// optional outcome label. Both rows share the feature ordering declared by
/// the group list that built them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchupSample {
    pub x: Tensor2,
    pub label: Option<u8>,
    pub meta: SampleMeta,
}

/// A matchup with its outcome but no features yet; the bridge between
/// prepared game rows and assembled model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledMatchup {
    pub season: Season,
    pub gender: Gender,
    pub t1: TeamId,
    pub t2: TeamId,
    pub label: u8,
}

impl From<&MatchRow> for LabeledMatchup {
    fn from(row: &MatchRow) -> Self {
        LabeledMatchup {
            season: row.season,
            gender: row.gender,
            t1: row.t1,
            t2: row.t2,
            label: row.label,
        }
    }
}

/// Assembles one labeled sample per matchup in input order.
pub fn build_samples(
    matchups: &[LabeledMatchup],
    tables: &FeatureTables,
    groups: &[FeatureGroup],
) -> Result<Vec<MatchupSample>, FeatureError> {
    matchups
        .iter()
        .map(|m| {
            let mut sample = assemble_features(m.t1, m.t2, m.gender, m.season, tables, groups)?;
            sample.label = Some(m.label);
            Ok(sample)
        })
        .collect()
}

/// Builds the 2×d input for a matchup in declared group order. The label is
/// left unset; training callers fill it from the source row.
pub fn assemble_features(
    t1: TeamId,
    t2: TeamId,
    gender: Gender,
    season: Season,
    tables: &FeatureTables,
    groups: &[FeatureGroup],
) -> Result<MatchupSample, FeatureError> {
    if groups.is_empty() {
        return Err(FeatureError::EmptyFeatureSet);
    }
    let d = feature_dim(groups);
    let mut data = Vec::with_capacity(2 * d);
    for team in [t1, t2] {
        let feat = tables.team_features(gender, season, team);
        for group in groups {
            match group {
                FeatureGroup::Seed => data.push(feat.seed_num),
                FeatureGroup::Elo => data.push(feat.elo),
                FeatureGroup::Quality => data.push(feat.quality),
                FeatureGroup::Gender => data.push(gender.as_feature()),
                FeatureGroup::Box => data.extend_from_slice(&feat.box_avgs),
            }
        }
    }
    Ok(MatchupSample {
        x: Tensor2::from_vec(2, d, data),
        label: None,
        meta: SampleMeta {
            season,
            gender,
            t1,
            t2,
        },
    })
}
