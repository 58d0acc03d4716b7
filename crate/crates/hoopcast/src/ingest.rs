//! Parsing of the competition-style CSV inputs into validated records.
//!
//! Three file shapes are understood: detailed game results (regular season
//! or tournament), tournament seeds, and team id/name lists. Men's and
//! women's files are separate inputs distinguished by the caller's gender
//! tag.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hoopcast_core::data::{
    BoxCounts, GameRecord, GameSource, Gender, Location, SeedEntry, TeamId, BOX_STAT_NAMES,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: csv error: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: missing column '{column}'")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: unknown column '{column}'")]
    UnknownColumn { path: PathBuf, column: String },
    #[error("{path} row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },
}

/// A rejected row kept for reporting when strict mode is off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    /// 1-based data row number (excluding the header).
    pub row: usize,
    pub message: String,
}

/// Outcome of a lenient parse: the valid records plus whatever was
/// dropped. In strict mode `issues` is always empty (the first problem
/// aborts the parse instead).
#[derive(Debug)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub issues: Vec<RowIssue>,
}

struct Columns {
    index: BTreeMap<String, usize>,
    path: PathBuf,
}

impl Columns {
    fn new(path: &Path, headers: &csv::StringRecord) -> Columns {
        Columns {
            index: headers
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim().to_string(), i))
                .collect(),
            path: path.to_path_buf(),
        }
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, name: &str) -> Result<&'r str, IngestError> {
        let idx = self
            .index
            .get(name)
            .ok_or_else(|| IngestError::MissingColumn {
                path: self.path.clone(),
                column: name.to_string(),
            })?;
        Ok(record.get(*idx).unwrap_or("").trim())
    }

    fn require_exact(&self, expected: &[String]) -> Result<(), IngestError> {
        for name in expected {
            if !self.index.contains_key(name) {
                return Err(IngestError::MissingColumn {
                    path: self.path.clone(),
                    column: name.clone(),
                });
            }
        }
        for name in self.index.keys() {
            if !expected.iter().any(|e| e == name) {
                return Err(IngestError::UnknownColumn {
                    path: self.path.clone(),
                    column: name.clone(),
                });
            }
        }
        Ok(())
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file))
}

fn game_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "Season", "DayNum", "WTeamID", "WScore", "LTeamID", "LScore", "WLoc", "NumOT",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for prefix in ["W", "L"] {
        for stat in BOX_STAT_NAMES {
            cols.push(format!("{prefix}{stat}"));
        }
    }
    cols
}

fn parse_num<T: std::str::FromStr>(
    cols: &Columns,
    record: &csv::StringRecord,
    row: usize,
    name: &str,
) -> Result<T, IngestError> {
    let raw = cols.get(record, name)?;
    raw.parse().map_err(|_| IngestError::Row {
        path: cols.path.clone(),
        row,
        message: format!("non-numeric value '{raw}' in column {name}"),
    })
}

fn parse_box(
    cols: &Columns,
    record: &csv::StringRecord,
    row: usize,
    prefix: &str,
) -> Result<BoxCounts, IngestError> {
    let mut counts = [0u32; 13];
    for (slot, stat) in counts.iter_mut().zip(BOX_STAT_NAMES.iter()) {
        *slot = parse_num(cols, record, row, &format!("{prefix}{stat}"))?;
    }
    Ok(BoxCounts(counts))
}

/// Parses a detailed-results file. The header must carry exactly the
/// expected column set (any order). In strict mode an invariant-violating
/// row aborts the parse; otherwise it is skipped and reported.
pub fn parse_games(
    path: &Path,
    gender: Gender,
    source: GameSource,
    strict: bool,
) -> Result<Parsed<GameRecord>, IngestError> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let cols = Columns::new(path, &headers);
    cols.require_exact(&game_columns())?;

    let mut records = Vec::new();
    let mut issues = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 1;
        let record = result.map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?;

        let parse_row = || -> Result<GameRecord, IngestError> {
            let location = match cols.get(&record, "WLoc")? {
                "H" => Location::Home,
                "A" => Location::Away,
                "N" => Location::Neutral,
                other => {
                    return Err(IngestError::Row {
                        path: path.to_path_buf(),
                        row,
                        message: format!("unknown location '{other}'"),
                    })
                }
            };
            let game = GameRecord {
                season: parse_num(&cols, &record, row, "Season")?,
                day_num: parse_num(&cols, &record, row, "DayNum")?,
                w_team: TeamId(parse_num(&cols, &record, row, "WTeamID")?),
                w_score: parse_num(&cols, &record, row, "WScore")?,
                l_team: TeamId(parse_num(&cols, &record, row, "LTeamID")?),
                l_score: parse_num(&cols, &record, row, "LScore")?,
                location,
                num_ot: parse_num(&cols, &record, row, "NumOT")?,
                gender,
                source,
                w_stats: parse_box(&cols, &record, row, "W")?,
                l_stats: parse_box(&cols, &record, row, "L")?,
            };
            game.validate().map_err(|e| IngestError::Row {
                path: path.to_path_buf(),
                row,
                message: e.to_string(),
            })?;
            Ok(game)
        };

        match parse_row() {
            Ok(game) => records.push(game),
            Err(e) if strict => return Err(e),
            Err(e) => issues.push(RowIssue {
                row,
                message: e.to_string(),
            }),
        }
    }
    Ok(Parsed { records, issues })
}

/// Parses a tournament-seeds file (`Season,Seed,TeamID`). Play-in
/// suffixes on the seed string are ignored; a seed with no digits is an
/// error naming the row.
pub fn parse_seeds(path: &Path, gender: Gender) -> Result<Vec<SeedEntry>, IngestError> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let cols = Columns::new(path, &headers);

    let mut entries = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 1;
        let record = result.map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let seed_str = cols.get(&record, "Seed")?.to_string();
        let seed_num = SeedEntry::parse_seed_num(&seed_str).ok_or_else(|| IngestError::Row {
            path: path.to_path_buf(),
            row,
            message: format!("seed string '{seed_str}' has no usable digits"),
        })?;
        entries.push(SeedEntry {
            season: parse_num(&cols, &record, row, "Season")?,
            team: TeamId(parse_num(&cols, &record, row, "TeamID")?),
            seed_str,
            seed_num,
            gender,
        });
    }
    Ok(entries)
}

/// Parses a team list (`TeamID,TeamName`, extra columns tolerated since
/// the men's file carries first/last D1 seasons). Duplicate ids are an
/// error.
pub fn parse_teams(path: &Path) -> Result<BTreeMap<TeamId, String>, IngestError> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let cols = Columns::new(path, &headers);

    let mut teams = BTreeMap::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 1;
        let record = result.map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let id = TeamId(parse_num(&cols, &record, row, "TeamID")?);
        let name = cols.get(&record, "TeamName")?.to_string();
        if teams.insert(id, name).is_some() {
            return Err(IngestError::Row {
                path: path.to_path_buf(),
                row,
                message: format!("duplicate team id {id}"),
            });
        }
    }
    Ok(teams)
}
