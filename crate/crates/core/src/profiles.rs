//! Full analysis pipeline: artist ranking, era baselines, artist–decade
//! profiles, trajectories, and the immutable [`AnalysisBundle`].

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::FeatureVector;
use crate::ingest::{AnalysisWindow, Decade, SongRecord, Warning, WarningKind};
use crate::metrics::{
    self, artist_rank_score, centered_cosine, classify_quadrant, contrast_ratio,
    decade_performance_score, dispersion, pearson, song_contribution, AlignmentMetrics,
    CorrelationResult, MetricsError,
};

pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("decade {decade}: need at least 2 songs with features for an era baseline, found {found}")]
    InsufficientEraSongs { decade: Decade, found: usize },
    #[error("decade {decade}: every song has identical features, era dispersion is zero")]
    ZeroEraDispersion { decade: Decade },
    #[error("no songs for {artist} in {decade}")]
    NoSongs { artist: String, decade: Decade },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl ProfileError {
    /// Decade the failure is attributed to, when there is one.
    pub fn decade(&self) -> Option<Decade> {
        match self {
            ProfileError::InsufficientEraSongs { decade, .. }
            | ProfileError::ZeroEraDispersion { decade }
            | ProfileError::NoSongs { decade, .. } => Some(*decade),
            ProfileError::Metrics(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub top_k: usize,
    pub window: AnalysisWindow,
    /// Minimum songs an artist needs in a decade for that decade to get a profile.
    pub min_songs_per_decade: usize,
    pub created_at: DateTime<Utc>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            top_k: DEFAULT_TOP_K,
            window: AnalysisWindow::default(),
            min_songs_per_decade: 1,
            created_at: Utc::now(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedArtist {
    /// Display name from the artist's first chart row.
    pub name: String,
    /// Normalized name; the identifier used in URLs.
    pub key: String,
    pub score: f64,
    pub distinct_songs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EraBaseline {
    pub decade: Decade,
    pub centroid: FeatureVector,
    pub sigma_era: f64,
    /// Feature-bearing songs the centroid and sigma were computed from.
    pub song_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateReason {
    /// None of the profile's songs has audio features.
    NoFeatures,
    /// The mean feature vector has five equal components.
    ConstantMeanVector,
    /// The era centroid has five equal components.
    ConstantEraCentroid,
}

impl DegenerateReason {
    pub fn describe(self) -> &'static str {
        match self {
            DegenerateReason::NoFeatures => "no song in this profile has audio features",
            DegenerateReason::ConstantMeanVector => {
                "mean feature vector is constant, shape similarity is undefined"
            }
            DegenerateReason::ConstantEraCentroid => {
                "era centroid is constant, shape similarity is undefined"
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Alignment {
    Classified(AlignmentMetrics),
    Degenerate { reason: DegenerateReason },
}

impl Alignment {
    pub fn metrics(&self) -> Option<&AlignmentMetrics> {
        match self {
            Alignment::Classified(m) => Some(m),
            Alignment::Degenerate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtistDecadeProfile {
    pub artist: String,
    pub artist_key: String,
    pub decade: Decade,
    /// Total weekly chart rows across the profile's songs.
    pub appearances: u32,
    pub distinct_songs: usize,
    pub performance_score: f64,
    pub mean_features: Option<FeatureVector>,
    pub sigma_artist: f64,
    pub alignment: Alignment,
    pub songs: Vec<SongRecord>,
}

/// A profile whose quadrant is not known yet, because the shape median is a
/// property of the whole set of profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDraft {
    pub artist: String,
    pub artist_key: String,
    pub decade: Decade,
    pub appearances: u32,
    pub distinct_songs: usize,
    pub performance_score: f64,
    pub mean_features: Option<FeatureVector>,
    pub sigma_artist: f64,
    /// `(shape_similarity, contrast_ratio)` or why it cannot be computed.
    pub position: Result<(f64, f64), DegenerateReason>,
    pub songs: Vec<SongRecord>,
}

impl ProfileDraft {
    pub fn classify(self, median_shape: f64) -> ArtistDecadeProfile {
        let alignment = match self.position {
            Ok((shape, contrast)) => Alignment::Classified(AlignmentMetrics {
                shape_similarity: shape,
                contrast_ratio: contrast,
                quadrant: classify_quadrant(shape, contrast, median_shape),
            }),
            Err(reason) => Alignment::Degenerate { reason },
        };
        ArtistDecadeProfile {
            artist: self.artist,
            artist_key: self.artist_key,
            decade: self.decade,
            appearances: self.appearances,
            distinct_songs: self.distinct_songs,
            performance_score: self.performance_score,
            mean_features: self.mean_features,
            sigma_artist: self.sigma_artist,
            alignment,
            songs: self.songs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub decade: Decade,
    pub shape_similarity: f64,
    pub contrast_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub artist: String,
    pub artist_key: String,
    pub points: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub created_at: DateTime<Utc>,
    pub window: AnalysisWindow,
    pub top_k: usize,
    pub artists: Vec<RankedArtist>,
    pub baselines: Vec<EraBaseline>,
    pub profiles: Vec<ArtistDecadeProfile>,
    pub trajectories: Vec<Trajectory>,
    /// `None` when no profile could be placed.
    pub median_shape: Option<f64>,
    /// `None` when the test was skipped; a warning says why.
    pub correlation: Option<CorrelationResult>,
    pub warnings: Vec<Warning>,
}

impl AnalysisBundle {
    pub fn artist(&self, key: &str) -> Option<&RankedArtist> {
        self.artists.iter().find(|a| a.key == key)
    }

    pub fn profile(&self, artist_key: &str, decade: Decade) -> Option<&ArtistDecadeProfile> {
        self.profiles
            .iter()
            .find(|p| p.artist_key == artist_key && p.decade == decade)
    }

    pub fn baseline(&self, decade: Decade) -> Option<&EraBaseline> {
        self.baselines.iter().find(|b| b.decade == decade)
    }

    pub fn trajectory(&self, artist_key: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.artist_key == artist_key)
    }

    pub fn classified_profiles(&self) -> impl Iterator<Item = (&ArtistDecadeProfile, &AlignmentMetrics)> {
        self.profiles
            .iter()
            .filter_map(|p| p.alignment.metrics().map(|m| (p, m)))
    }
}

fn contributions(songs: &[&SongRecord]) -> Result<Vec<f64>, MetricsError> {
    songs
        .iter()
        .map(|s| song_contribution(s.weeks, s.avg_rank))
        .collect()
}

/// Ranks artists by their score over all of their songs and keeps the first `k`.
///
/// Ties are broken by artist key ascending.
pub fn select_top_artists(songs: &[SongRecord], k: usize) -> Result<Vec<RankedArtist>, ProfileError> {
    let mut by_artist: BTreeMap<&str, Vec<&SongRecord>> = BTreeMap::new();
    for song in songs {
        by_artist.entry(&song.key.artist_norm).or_default().push(song);
    }

    let mut ranked = by_artist
        .into_iter()
        .map(|(key, songs)| {
            let score = artist_rank_score(&contributions(&songs)?, songs.len())?;
            Ok(RankedArtist {
                name: first_display_name(&songs),
                key: key.to_string(),
                score,
                distinct_songs: songs.len(),
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;

    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.key.cmp(&b.key)));
    ranked.truncate(k);
    Ok(ranked)
}

/// Display name taken from the artist's earliest chart row.
fn first_display_name(songs: &[&SongRecord]) -> String {
    songs
        .iter()
        .min_by_key(|s| (s.entries.iter().map(|e| e.week).min(), &s.key))
        .map(|s| s.display_artist.clone())
        .unwrap_or_default()
}

/// Builds the reference point for one decade from every feature-bearing song in it.
///
/// Featureless songs are skipped and reported in the returned warnings.
pub fn build_era_baseline(
    decade: Decade,
    songs: &[&SongRecord],
) -> Result<(EraBaseline, Vec<Warning>), ProfileError> {
    let mut warnings = Vec::new();
    let mut vectors = Vec::with_capacity(songs.len());
    for song in songs.iter().filter(|s| s.decade == decade) {
        match song.features {
            Some(v) => vectors.push(v),
            None => warnings.push(Warning {
                kind: WarningKind::ExcludedFromBaseline,
                key: Some(song.key.clone()),
                artist: Some(song.display_artist.clone()),
                decade: Some(decade),
                reason: "song has no audio features".to_string(),
            }),
        }
    }
    if vectors.len() < 2 {
        return Err(ProfileError::InsufficientEraSongs {
            decade,
            found: vectors.len(),
        });
    }
    let sigma_era = dispersion(&vectors)?;
    if sigma_era <= 0.0 {
        return Err(ProfileError::ZeroEraDispersion { decade });
    }
    let centroid = FeatureVector::mean_of(&vectors).expect("non-empty");
    Ok((
        EraBaseline {
            decade,
            centroid,
            sigma_era,
            song_count: vectors.len(),
        },
        warnings,
    ))
}

/// Computes everything about an artist–decade pair except its quadrant.
pub fn build_profile(
    artist: &str,
    artist_key: &str,
    decade: Decade,
    songs: Vec<SongRecord>,
    baseline: &EraBaseline,
) -> Result<ProfileDraft, ProfileError> {
    if songs.is_empty() {
        return Err(ProfileError::NoSongs {
            artist: artist.to_string(),
            decade,
        });
    }
    debug_assert_eq!(baseline.decade, decade);

    let refs: Vec<&SongRecord> = songs.iter().collect();
    let performance_score = decade_performance_score(&contributions(&refs)?, songs.len())?;
    let appearances = songs.iter().map(|s| s.weeks).sum();

    let vectors: Vec<FeatureVector> = songs.iter().filter_map(|s| s.features).collect();
    let mean_features = FeatureVector::mean_of(&vectors);
    let sigma_artist = if vectors.is_empty() {
        0.0
    } else {
        dispersion(&vectors)?
    };

    let position = match mean_features {
        None => Err(DegenerateReason::NoFeatures),
        Some(mean) => match centered_cosine(&mean, &baseline.centroid) {
            Ok(shape) => Ok((shape, contrast_ratio(sigma_artist, baseline.sigma_era)?)),
            Err(MetricsError::DegenerateVector) => Err(if is_flat(&mean) {
                DegenerateReason::ConstantMeanVector
            } else {
                DegenerateReason::ConstantEraCentroid
            }),
            Err(e) => return Err(e.into()),
        },
    };

    Ok(ProfileDraft {
        artist: artist.to_string(),
        artist_key: artist_key.to_string(),
        decade,
        appearances,
        distinct_songs: songs.len(),
        performance_score,
        mean_features,
        sigma_artist,
        position,
        songs,
    })
}

fn is_flat(v: &FeatureVector) -> bool {
    let c = v.to_array();
    c.iter().all(|&x| x == c[0])
}

/// Runs the whole analysis over joined song records.
///
/// `warnings` carries diagnostics from earlier stages (ingestion) into the bundle.
pub fn assemble_bundle(
    records: &[SongRecord],
    mut warnings: Vec<Warning>,
    config: &AnalysisConfig,
) -> Result<AnalysisBundle, ProfileError> {
    let artists = select_top_artists(records, config.top_k)?;

    let mut by_decade: BTreeMap<Decade, Vec<&SongRecord>> = BTreeMap::new();
    for song in records {
        by_decade.entry(song.decade).or_default().push(song);
    }
    let mut baselines = Vec::with_capacity(by_decade.len());
    for (&decade, songs) in &by_decade {
        let (baseline, baseline_warnings) = build_era_baseline(decade, songs)?;
        warnings.extend(baseline_warnings);
        baselines.push(baseline);
    }

    let mut drafts = Vec::new();
    for artist in &artists {
        let mut per_decade: BTreeMap<Decade, Vec<SongRecord>> = BTreeMap::new();
        for song in records.iter().filter(|s| s.key.artist_norm == artist.key) {
            per_decade.entry(song.decade).or_default().push(song.clone());
        }
        for (decade, songs) in per_decade {
            if songs.len() < config.min_songs_per_decade.max(1) {
                continue;
            }
            let baseline = baselines
                .iter()
                .find(|b| b.decade == decade)
                .expect("every decade with songs has a baseline");
            let draft = build_profile(&artist.name, &artist.key, decade, songs, baseline)?;
            if let Err(reason) = draft.position {
                warnings.push(Warning {
                    kind: WarningKind::DegenerateProfile,
                    key: None,
                    artist: Some(artist.name.clone()),
                    decade: Some(decade),
                    reason: reason.describe().to_string(),
                });
            }
            drafts.push(draft);
        }
    }

    let positions: Vec<(f64, f64)> = drafts.iter().filter_map(|d| d.position.ok()).collect();
    let shapes: Vec<f64> = positions.iter().map(|p| p.0).collect();
    let contrasts: Vec<f64> = positions.iter().map(|p| p.1).collect();
    let median_shape = metrics::median(&shapes);

    let correlation = match pearson(&shapes, &contrasts) {
        Ok(c) => Some(c),
        Err(e @ (MetricsError::TooFewPoints(_) | MetricsError::ConstantInput)) => {
            warnings.push(Warning {
                kind: WarningKind::CorrelationSkipped,
                key: None,
                artist: None,
                decade: None,
                reason: e.to_string(),
            });
            None
        }
        Err(e) => return Err(e.into()),
    };

    // the median only matters for classified profiles; any value works otherwise
    let boundary = median_shape.unwrap_or(0.0);
    let profiles: Vec<ArtistDecadeProfile> =
        drafts.into_iter().map(|d| d.classify(boundary)).collect();

    let trajectories = artists
        .iter()
        .map(|artist| Trajectory {
            artist: artist.name.clone(),
            artist_key: artist.key.clone(),
            points: profiles
                .iter()
                .filter(|p| p.artist_key == artist.key)
                .filter_map(|p| {
                    p.alignment.metrics().map(|m| TrajectoryPoint {
                        decade: p.decade,
                        shape_similarity: m.shape_similarity,
                        contrast_ratio: m.contrast_ratio,
                    })
                })
                .collect(),
        })
        .collect();

    Ok(AnalysisBundle {
        created_at: config.created_at,
        window: config.window,
        top_k: config.top_k,
        artists,
        baselines,
        profiles,
        trajectories,
        median_shape,
        correlation,
        warnings,
    })
}
