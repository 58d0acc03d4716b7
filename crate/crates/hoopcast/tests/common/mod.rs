//! Synthetic competition-format dataset for end-to-end tests: a small
//! league per gender with latent team strengths driving both regular
//! season and tournament outcomes.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct LeagueSpec {
    /// Seasons that get regular-season games, seeds, and tournaments.
    pub seasons: Vec<u16>,
    /// Additional season with regular-season games and seeds but no
    /// tournament (the prediction target).
    pub predict_season: Option<u16>,
    pub teams_per_gender: u32,
    pub seeded_teams: u32,
    pub seed: u64,
}

impl Default for LeagueSpec {
    fn default() -> Self {
        LeagueSpec {
            seasons: vec![2018, 2019, 2020, 2021],
            predict_season: Some(2022),
            teams_per_gender: 10,
            seeded_teams: 8,
            seed: 42,
        }
    }
}

fn game_header() -> String {
    let mut cols = vec![
        "Season", "DayNum", "WTeamID", "WScore", "LTeamID", "LScore", "WLoc", "NumOT",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    for prefix in ["W", "L"] {
        for stat in [
            "FGM", "FGA", "FGM3", "FGA3", "FTM", "FTA", "OR", "DR", "Ast", "TO", "Stl", "Blk", "PF",
        ] {
            cols.push(format!("{prefix}{stat}"));
        }
    }
    cols.join(",")
}

fn box_line(rng: &mut ChaCha8Rng, strength: f64) -> String {
    let fga = rng.gen_range(48..66);
    let fgm = ((fga as f64) * (0.38 + 0.004 * strength + rng.gen_range(-0.03..0.03)))
        .clamp(10.0, fga as f64) as u32;
    let fga3 = rng.gen_range(14..26);
    let fgm3 = ((fga3 as f64) * rng.gen_range(0.25..0.40)).floor() as u32;
    let fta = rng.gen_range(10..28);
    let ftm = ((fta as f64) * rng.gen_range(0.6..0.85)).floor() as u32;
    format!(
        "{fgm},{fga},{fgm3},{fga3},{ftm},{fta},{},{},{},{},{},{},{}",
        rng.gen_range(5..16),
        rng.gen_range(18..32),
        rng.gen_range(8..20),
        rng.gen_range(8..20),
        rng.gen_range(3..11),
        rng.gen_range(1..8),
        rng.gen_range(12..24),
    )
}

struct GameOutcome {
    winner: u32,
    loser: u32,
    w_score: u32,
    l_score: u32,
    num_ot: u8,
}

fn play(rng: &mut ChaCha8Rng, a: u32, b: u32, sa: f64, sb: f64) -> GameOutcome {
    let margin = sa - sb + rng.gen_range(-8.0..8.0) + rng.gen_range(-8.0..8.0);
    let num_ot = if margin.abs() < 1.0 { 1 } else { 0 };
    let base = rng.gen_range(55..75);
    let gap = margin.abs().ceil().max(1.0) as u32;
    if margin >= 0.0 {
        GameOutcome {
            winner: a,
            loser: b,
            w_score: base + gap,
            l_score: base,
            num_ot,
        }
    } else {
        GameOutcome {
            winner: b,
            loser: a,
            w_score: base + gap,
            l_score: base,
            num_ot,
        }
    }
}

/// Writes the eight competition-format CSVs into `dir` and returns it.
pub fn write_synthetic_dataset(dir: &Path, spec: &LeagueSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for (gender_prefix, id_base) in [("M", 1100u32), ("W", 3100u32)] {
        let team_ids: Vec<u32> = (1..=spec.teams_per_gender).map(|i| id_base + i).collect();

        let mut teams_csv = String::from("TeamID,TeamName\n");
        for id in &team_ids {
            let _ = writeln!(teams_csv, "{id},Team {id}");
        }
        std::fs::write(dir.join(format!("{gender_prefix}Teams.csv")), teams_csv).unwrap();

        let mut regular = format!("{}\n", game_header());
        let mut tourney = format!("{}\n", game_header());
        let mut seeds_csv = String::from("Season,Seed,TeamID\n");

        let mut all_seasons = spec.seasons.clone();
        if let Some(p) = spec.predict_season {
            all_seasons.push(p);
        }
        for &season in &all_seasons {
            // Fresh latent strengths each season.
            let strengths: Vec<f64> = team_ids.iter().map(|_| rng.gen_range(-9.0..9.0)).collect();

            // Double round robin regular season.
            let mut day = 10u16;
            for i in 0..team_ids.len() {
                for j in (i + 1)..team_ids.len() {
                    for _ in 0..2 {
                        let g = play(
                            &mut rng,
                            team_ids[i],
                            team_ids[j],
                            strengths[i],
                            strengths[j],
                        );
                        let w_idx = team_ids.iter().position(|t| *t == g.winner).unwrap();
                        let l_idx = team_ids.iter().position(|t| *t == g.loser).unwrap();
                        let _ = writeln!(
                            regular,
                            "{season},{day},{},{},{},{},N,{},{},{}",
                            g.winner,
                            g.w_score,
                            g.loser,
                            g.l_score,
                            g.num_ot,
                            box_line(&mut rng, strengths[w_idx]),
                            box_line(&mut rng, strengths[l_idx]),
                        );
                        day = (day % 120) + 1 + 9;
                    }
                }
            }

            // Seed the strongest teams.
            let mut order: Vec<usize> = (0..team_ids.len()).collect();
            order.sort_by(|a, b| strengths[*b].partial_cmp(&strengths[*a]).unwrap());
            let seeded: Vec<usize> = order.into_iter().take(spec.seeded_teams as usize).collect();
            for (rank, idx) in seeded.iter().enumerate() {
                let suffix = if rank + 1 == spec.seeded_teams as usize && season % 2 == 0 {
                    "a" // exercise play-in suffix parsing
                } else {
                    ""
                };
                let _ = writeln!(
                    seeds_csv,
                    "{season},X{:02}{suffix},{}",
                    rank + 1,
                    team_ids[*idx]
                );
            }

            // Single-elimination tournament for non-predict seasons.
            if Some(season) != spec.predict_season {
                let mut alive = seeded.clone();
                let mut day = 134u16;
                while alive.len() > 1 {
                    let mut next = Vec::new();
                    for pair in 0..alive.len() / 2 {
                        let hi = alive[pair];
                        let lo = alive[alive.len() - 1 - pair];
                        let g = play(
                            &mut rng,
                            team_ids[hi],
                            team_ids[lo],
                            strengths[hi],
                            strengths[lo],
                        );
                        let w_idx = team_ids.iter().position(|t| *t == g.winner).unwrap();
                        let l_idx = team_ids.iter().position(|t| *t == g.loser).unwrap();
                        let _ = writeln!(
                            tourney,
                            "{season},{day},{},{},{},{},N,{},{},{}",
                            g.winner,
                            g.w_score,
                            g.loser,
                            g.l_score,
                            g.num_ot,
                            box_line(&mut rng, strengths[w_idx]),
                            box_line(&mut rng, strengths[l_idx]),
                        );
                        next.push(if g.winner == team_ids[hi] { hi } else { lo });
                    }
                    day += 2;
                    alive = next;
                }
            }
        }

        std::fs::write(
            dir.join(format!("{gender_prefix}RegularSeasonDetailedResults.csv")),
            regular,
        )
        .unwrap();
        std::fs::write(
            dir.join(format!("{gender_prefix}NCAATourneyDetailedResults.csv")),
            tourney,
        )
        .unwrap();
        std::fs::write(
            dir.join(format!("{gender_prefix}NCAATourneySeeds.csv")),
            seeds_csv,
        )
        .unwrap();
    }
}
