//! Feature-table cache files and summary statistics.
//!
//! The cache is one long-format CSV (`gender,season,team,feature,value`)
//! holding every fitted table; loading it back reproduces the tables
//! bit-exactly because values are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use hoopcast_core::data::{Gender, MatchRow, Season, TeamId, BOX_STAT_NAMES};
use hoopcast_core::elo::EloTable;
use hoopcast_core::features::{BoxAverages, FeatureTables, SeedTable};
use hoopcast_core::glm::QualityTable;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableIoError {
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
    #[error("{path} line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_write(path: &Path, e: std::io::Error) -> TableIoError {
    TableIoError::Write {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Serializes all four tables to the long-format cache CSV.
pub fn write_feature_cache(path: &Path, tables: &FeatureTables) -> Result<(), TableIoError> {
    let mut out = String::from("gender,season,team,feature,value\n");
    for ((gender, season, team), seed) in &tables.seeds.seeds {
        out.push_str(&format!("{gender},{season},{team},seed,{seed}\n"));
    }
    for ((gender, season, team), rating) in &tables.elo.ratings {
        out.push_str(&format!("{gender},{season},{team},elo,{rating}\n"));
    }
    for ((gender, season, team), quality) in &tables.quality.quality {
        out.push_str(&format!("{gender},{season},{team},quality,{quality}\n"));
    }
    for ((gender, season, team), avgs) in &tables.box_avgs {
        for (stat, value) in BOX_STAT_NAMES.iter().zip(avgs.avgs.iter()) {
            out.push_str(&format!("{gender},{season},{team},box_{stat},{value}\n"));
        }
        out.push_str(&format!(
            "{gender},{season},{team},games_played,{}\n",
            avgs.games_played
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| io_write(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| io_write(path, e))
}

/// Rebuilds the tables from a cache CSV. `elo_base_rating` comes from the
/// run configuration since the cache stores only fitted entries.
pub fn read_feature_cache(
    path: &Path,
    elo_base_rating: f64,
) -> Result<FeatureTables, TableIoError> {
    let content = std::fs::read_to_string(path).map_err(|e| TableIoError::Read {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut seeds = SeedTable::default();
    let mut elo = EloTable {
        base_rating: elo_base_rating,
        ..Default::default()
    };
    let mut quality = QualityTable::default();
    let mut box_builder: BTreeMap<(Gender, Season, TeamId), BoxAverages> = BTreeMap::new();

    for (i, line) in content.lines().enumerate() {
        if i == 0 {
            continue; // header
        }
        let fail = |message: String| TableIoError::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(fail(format!("expected 5 fields, got {}", parts.len())));
        }
        let gender =
            Gender::parse(parts[0]).ok_or_else(|| fail(format!("bad gender '{}'", parts[0])))?;
        let season: Season = parts[1]
            .parse()
            .map_err(|_| fail(format!("bad season '{}'", parts[1])))?;
        let team = TeamId(
            parts[2]
                .parse()
                .map_err(|_| fail(format!("bad team id '{}'", parts[2])))?,
        );
        let feature = parts[3];
        let value: f64 = parts[4]
            .parse()
            .map_err(|_| fail(format!("bad value '{}'", parts[4])))?;
        let key = (gender, season, team);
        match feature {
            "seed" => {
                seeds.seeds.insert(key, value as u8);
            }
            "elo" => {
                elo.ratings.insert(key, value);
            }
            "quality" => {
                quality.quality.insert(key, value);
            }
            "games_played" => {
                box_builder
                    .entry(key)
                    .or_insert(BoxAverages {
                        avgs: [0.0; 13],
                        games_played: 0,
                    })
                    .games_played = value as u32;
            }
            other => {
                let stat = other
                    .strip_prefix("box_")
                    .ok_or_else(|| fail(format!("unknown feature '{other}'")))?;
                let idx = BOX_STAT_NAMES
                    .iter()
                    .position(|s| *s == stat)
                    .ok_or_else(|| fail(format!("unknown box stat '{stat}'")))?;
                box_builder
                    .entry(key)
                    .or_insert(BoxAverages {
                        avgs: [0.0; 13],
                        games_played: 0,
                    })
                    .avgs[idx] = value;
            }
        }
    }
    Ok(FeatureTables::new(seeds, elo, quality, box_builder))
}

/// Inspection export of prepared match rows; column order is fixed:
/// season, day_num, gender, source, label, t1, t2, t1_score, t2_score,
/// then the 13 t1 box stats and the 13 t2 box stats.
pub fn write_match_rows(path: &Path, rows: &[MatchRow]) -> Result<(), TableIoError> {
    let mut header = String::from("season,day_num,gender,source,label,t1,t2,t1_score,t2_score");
    for side in ["t1", "t2"] {
        for stat in BOX_STAT_NAMES {
            header.push_str(&format!(",{side}_{stat}"));
        }
    }
    header.push('\n');

    let mut out = header;
    for r in rows {
        let source = match r.source {
            hoopcast_core::data::GameSource::RegularSeason => "regular",
            hoopcast_core::data::GameSource::Tournament => "tournament",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}",
            r.season, r.day_num, r.gender, source, r.label, r.t1, r.t2, r.t1_score, r.t2_score
        ));
        for v in r.t1_stats.0.iter().chain(r.t2_stats.0.iter()) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| io_write(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| io_write(path, e))
}

/// Per-feature distribution summary over all fitted team-seasons:
/// mean, sample std, min, quartiles, max.
pub fn write_feature_summary(path: &Path, tables: &FeatureTables) -> Result<(), TableIoError> {
    let mut out = String::from("feature,count,mean,std,min,q25,median,q75,max\n");

    let mut push_summary = |name: &str, values: &mut Vec<f64>| {
        if values.is_empty() {
            return;
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let q = |frac: f64| -> f64 {
            let pos = frac * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let t = pos - lo as f64;
            values[lo] * (1.0 - t) + values[hi] * t
        };
        out.push_str(&format!(
            "{name},{n},{mean},{std},{},{},{},{},{}\n",
            values[0],
            q(0.25),
            q(0.5),
            q(0.75),
            values[n - 1]
        ));
    };

    let mut seeds: Vec<f64> = tables.seeds.seeds.values().map(|s| f64::from(*s)).collect();
    push_summary("seed", &mut seeds);
    let mut elo: Vec<f64> = tables.elo.ratings.values().copied().collect();
    push_summary("elo", &mut elo);
    let mut quality: Vec<f64> = tables.quality.quality.values().copied().collect();
    push_summary("quality", &mut quality);
    for (idx, stat) in BOX_STAT_NAMES.iter().enumerate() {
        let mut values: Vec<f64> = tables.box_avgs.values().map(|b| b.avgs[idx]).collect();
        push_summary(&format!("box_{stat}"), &mut values);
    }

    let mut file = std::fs::File::create(path).map_err(|e| io_write(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| io_write(path, e))
}
