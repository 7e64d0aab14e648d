//! CSV ingestion: weekly chart rows, per-song audio features, and the join
//! that turns them into [`SongRecord`]s.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::feature::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};

pub const CHARTS_HEADER: [&str; 4] = ["week", "rank", "artist", "song"];
pub const FEATURES_HEADER: [&str; 7] = [
    "artist",
    "song",
    "valence",
    "energy",
    "danceability",
    "acousticness",
    "liveness",
];

pub const MIN_RANK: u32 = 1;
pub const MAX_RANK: u32 = 100;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header: expected `{expected}`, found `{found}`")]
    MalformedHeader { expected: String, found: String },
    #[error("line {line}: bad rank `{value}` (expected an integer in 1..=100)")]
    BadRank { line: u64, value: String },
    #[error("line {line}: bad week `{value}` ({reason})")]
    BadDate {
        line: u64,
        value: String,
        reason: String,
    },
    #[error("line {line}: duplicate chart entry for {artist} / {song} on {week} (first seen on line {first_line})")]
    DuplicateEntry {
        line: u64,
        first_line: u64,
        artist: String,
        song: String,
        week: NaiveDate,
    },
    #[error("line {line}, column {column}: feature value `{value}` outside [0, 1]")]
    FeatureOutOfRange {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}: duplicate feature key {key} (first seen on line {first_line})")]
    DuplicateKey {
        line: u64,
        first_line: u64,
        key: SongKey,
    },
    #[error("assign_decade called with no entries")]
    EmptyEntries,
    #[error("line {line}: {source}")]
    Csv {
        line: u64,
        #[source]
        source: csv::Error,
    },
}

/// Inclusive date range chart weeks must fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for AnalysisWindow {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(1960, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2019, 12, 31).unwrap(),
        }
    }
}

impl AnalysisWindow {
    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }
}

/// A decade identified by its first year; rendered as e.g. `1990s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decade(i32);

impl Decade {
    pub fn containing(day: NaiveDate) -> Self {
        Decade(day.year().div_euclid(10) * 10)
    }

    pub fn start_year(self) -> i32 {
        self.0
    }
}

impl fmt::Display for Decade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid decade label `{0}`")]
pub struct BadDecadeLabel(pub String);

impl FromStr for Decade {
    type Err = BadDecadeLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let year = s
            .strip_suffix('s')
            .filter(|y| y.len() == 4)
            .and_then(|y| y.parse::<i32>().ok())
            .filter(|y| y % 10 == 0)
            .ok_or_else(|| BadDecadeLabel(s.to_string()))?;
        Ok(Decade(year))
    }
}

impl Serialize for Decade {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decade {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One weekly chart observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartEntry {
    pub artist_name: String,
    pub song_title: String,
    pub week: NaiveDate,
    pub rank: u32,
}

/// Normalized join key shared by chart rows and feature rows.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SongKey {
    pub artist_norm: String,
    pub title_norm: String,
}

impl fmt::Display for SongKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} | {})", self.artist_norm, self.title_norm)
    }
}

/// Lowercase, trim, and collapse internal whitespace runs to a single space.
pub fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn normalize_key(artist: &str, title: &str) -> SongKey {
    SongKey {
        artist_norm: normalize_text(artist),
        title_norm: normalize_text(title),
    }
}

/// A song joined with its features and charting aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SongRecord {
    pub key: SongKey,
    pub display_artist: String,
    pub display_title: String,
    pub features: Option<FeatureVector>,
    pub weeks: u32,
    pub avg_rank: f64,
    pub peak_rank: u32,
    pub decade: Decade,
    pub entries: Vec<ChartEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    /// A charting song has no row in the features file.
    MissingFeatures,
    /// A featureless song was left out of an era baseline.
    ExcludedFromBaseline,
    /// A profile could not be placed in the alignment space.
    DegenerateProfile,
    /// Too few usable profiles (or constant axes) for a correlation test.
    CorrelationSkipped,
}

/// Structured, non-fatal diagnostic carried along with the analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub key: Option<SongKey>,
    pub artist: Option<String>,
    pub decade: Option<Decade>,
    pub reason: String,
}

fn read_header<R: Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<(), IngestError> {
    let found = reader
        .headers()
        .map_err(|source| IngestError::Csv { line: 1, source })?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(IngestError::MalformedHeader {
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source)
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Parses `charts.csv` using the default analysis window.
pub fn parse_charts<R: Read>(source: R) -> Result<Vec<ChartEntry>, IngestError> {
    parse_charts_in_window(source, &AnalysisWindow::default())
}

pub fn parse_charts_in_window<R: Read>(
    source: R,
    window: &AnalysisWindow,
) -> Result<Vec<ChartEntry>, IngestError> {
    let mut reader = csv_reader(source);
    read_header(&mut reader, &CHARTS_HEADER)?;

    let mut seen: HashMap<(SongKey, NaiveDate), u64> = HashMap::new();
    let mut entries = Vec::new();
    for row in reader.records() {
        let record = row.map_err(|source| IngestError::Csv {
            line: source.position().map(|p| p.line()).unwrap_or(0),
            source,
        })?;
        let line = record_line(&record);
        let (week_raw, rank_raw, artist, song) = (&record[0], &record[1], &record[2], &record[3]);

        let week = NaiveDate::parse_from_str(week_raw, "%Y-%m-%d").map_err(|e| {
            IngestError::BadDate {
                line,
                value: week_raw.to_string(),
                reason: e.to_string(),
            }
        })?;
        if !window.contains(week) {
            return Err(IngestError::BadDate {
                line,
                value: week_raw.to_string(),
                reason: format!("outside window {}..{}", window.start, window.end),
            });
        }

        let rank = rank_raw
            .parse::<u32>()
            .ok()
            .filter(|r| (MIN_RANK..=MAX_RANK).contains(r))
            .ok_or_else(|| IngestError::BadRank {
                line,
                value: rank_raw.to_string(),
            })?;

        let key = normalize_key(artist, song);
        if let Some(&first_line) = seen.get(&(key.clone(), week)) {
            return Err(IngestError::DuplicateEntry {
                line,
                first_line,
                artist: artist.to_string(),
                song: song.to_string(),
                week,
            });
        }
        seen.insert((key, week), line);

        entries.push(ChartEntry {
            artist_name: artist.to_string(),
            song_title: song.to_string(),
            week,
            rank,
        });
    }
    Ok(entries)
}

/// Writes entries back out in the `charts.csv` format.
pub fn write_charts<W: Write>(entries: &[ChartEntry], sink: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(CHARTS_HEADER)?;
    for e in entries {
        writer.write_record([
            e.week.format("%Y-%m-%d").to_string(),
            e.rank.to_string(),
            e.artist_name.clone(),
            e.song_title.clone(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn parse_features<R: Read>(source: R) -> Result<BTreeMap<SongKey, FeatureVector>, IngestError> {
    let mut reader = csv_reader(source);
    read_header(&mut reader, &FEATURES_HEADER)?;

    let mut first_seen: HashMap<SongKey, u64> = HashMap::new();
    let mut out = BTreeMap::new();
    for row in reader.records() {
        let record = row.map_err(|source| IngestError::Csv {
            line: source.position().map(|p| p.line()).unwrap_or(0),
            source,
        })?;
        let line = record_line(&record);
        let key = normalize_key(&record[0], &record[1]);

        let mut components = [0.0; FEATURE_COUNT];
        for (i, slot) in components.iter_mut().enumerate() {
            let raw = &record[i + 2];
            *slot = raw
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| (0.0..=1.0).contains(v))
                .ok_or_else(|| IngestError::FeatureOutOfRange {
                    line,
                    column: FEATURE_NAMES[i].to_string(),
                    value: raw.to_string(),
                })?;
        }

        if let Some(&first_line) = first_seen.get(&key) {
            return Err(IngestError::DuplicateKey {
                line,
                first_line,
                key,
            });
        }
        first_seen.insert(key.clone(), line);
        out.insert(key, FeatureVector::from_array_unchecked(components));
    }
    Ok(out)
}

/// Decade of the song's earliest chart week.
pub fn assign_decade(entries: &[ChartEntry]) -> Result<Decade, IngestError> {
    entries
        .iter()
        .map(|e| e.week)
        .min()
        .map(Decade::containing)
        .ok_or(IngestError::EmptyEntries)
}

/// Groups chart rows by [`SongKey`] and attaches features.
///
/// Records come back sorted by key. Songs with no feature row are kept with
/// `features: None` and reported in the returned warnings.
pub fn build_song_records(
    charts: &[ChartEntry],
    features: &BTreeMap<SongKey, FeatureVector>,
) -> (Vec<SongRecord>, Vec<Warning>) {
    let mut grouped: BTreeMap<SongKey, Vec<ChartEntry>> = BTreeMap::new();
    for entry in charts {
        grouped
            .entry(normalize_key(&entry.artist_name, &entry.song_title))
            .or_default()
            .push(entry.clone());
    }

    let mut warnings = Vec::new();
    let records = grouped
        .into_iter()
        .map(|(key, entries)| {
            let weeks = entries.len() as u32;
            let rank_sum: u64 = entries.iter().map(|e| u64::from(e.rank)).sum();
            let peak_rank = entries.iter().map(|e| e.rank).min().unwrap();
            let decade = assign_decade(&entries).unwrap();
            let song_features = features.get(&key).copied();
            if song_features.is_none() {
                warnings.push(Warning {
                    kind: WarningKind::MissingFeatures,
                    key: Some(key.clone()),
                    artist: Some(entries[0].artist_name.clone()),
                    decade: Some(decade),
                    reason: "no matching row in features file".to_string(),
                });
            }
            SongRecord {
                display_artist: entries[0].artist_name.clone(),
                display_title: entries[0].song_title.clone(),
                key,
                features: song_features,
                weeks,
                avg_rank: rank_sum as f64 / f64::from(weeks),
                peak_rank,
                decade,
                entries,
            }
        })
        .collect();
    (records, warnings)
}
