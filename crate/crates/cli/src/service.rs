//! Read-only JSON API over one loaded [`AnalysisBundle`].
//!
//! Endpoints:
//!
//! - `GET /api/summary`
//! - `GET /api/artists`
//! - `GET /api/artists/{artist}/trajectory`
//! - `GET /api/artists/{artist}/decades/{decade}`
//! - `GET /api/artists/{artist}/decades/{decade}/songs/{title}`
//!
//! `{artist}` and `{title}` are matched after key normalization, so both the
//! normalized key and the display name (percent-encoded) resolve.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::Serialize;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use eralign_core::ingest::normalize_text;
use eralign_core::metrics::deviation;
use eralign_core::{
    to_canonical_json, Alignment, AnalysisBundle, ArtistDecadeProfile, CorrelationResult, Decade,
    EraBaseline, FeatureDeviation, FeatureVector, SongRecord, TrajectoryPoint, FEATURE_NAMES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    NotFound,
    BadRequest,
    DegenerateProfile,
}

impl ErrorCode {
    fn status(self) -> StatusCode {
        match self {
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::DegenerateProfile => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    pub status: u16,
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            status: code.status().as_u16(),
            code,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }
}

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match to_canonical_json(body) {
        Ok(text) => (status, [(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        json_response(status, &self)
    }
}

struct Json<T>(T);

impl<T: Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        json_response(StatusCode::OK, &self.0)
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = Arc<AnalysisBundle>;

#[derive(Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CorrelationSummary {
    Computed(CorrelationResult),
    Skipped { reason: String },
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub created_at: String,
    pub window_start: String,
    pub window_end: String,
    pub top_k: usize,
    pub artist_count: usize,
    pub profile_count: usize,
    pub classified_count: usize,
    pub median_shape: Option<f64>,
    pub contrast_boundary: f64,
    pub correlation: CorrelationSummary,
    pub decades: Vec<Decade>,
    pub warning_count: usize,
}

pub fn summarize(bundle: &AnalysisBundle) -> Summary {
    let correlation = match &bundle.correlation {
        Some(c) => CorrelationSummary::Computed(*c),
        None => CorrelationSummary::Skipped {
            reason: bundle
                .warnings
                .iter()
                .find(|w| w.kind == eralign_core::WarningKind::CorrelationSkipped)
                .map(|w| w.reason.clone())
                .unwrap_or_else(|| "not enough classified profiles".to_string()),
        },
    };
    Summary {
        created_at: bundle.created_at.to_rfc3339(),
        window_start: bundle.window.start.to_string(),
        window_end: bundle.window.end.to_string(),
        top_k: bundle.top_k,
        artist_count: bundle.artists.len(),
        profile_count: bundle.profiles.len(),
        classified_count: bundle.classified_profiles().count(),
        median_shape: bundle.median_shape,
        contrast_boundary: eralign_core::metrics::CONTRAST_BOUNDARY,
        correlation,
        decades: bundle.baselines.iter().map(|b| b.decade).collect(),
        warning_count: bundle.warnings.len(),
    }
}

#[derive(Debug, Serialize)]
pub struct DecadeBubble {
    pub decade: Decade,
    pub appearances: u32,
    pub distinct_songs: usize,
    pub performance_score: f64,
    pub alignment: Alignment,
}

#[derive(Debug, Serialize)]
pub struct TrajectoryDoc {
    pub artist: String,
    pub artist_key: String,
    pub rank: usize,
    pub score: f64,
    pub points: Vec<TrajectoryPoint>,
    pub decades: Vec<DecadeBubble>,
}

#[derive(Debug, Serialize)]
pub struct SongRow {
    pub title: String,
    pub title_key: String,
    pub avg_rank: f64,
    pub peak_rank: u32,
    pub weeks: u32,
    pub has_features: bool,
}

#[derive(Debug, Serialize)]
pub struct ProfileDoc {
    pub artist: String,
    pub artist_key: String,
    pub decade: Decade,
    pub appearances: u32,
    pub distinct_songs: usize,
    pub performance_score: f64,
    pub alignment: Alignment,
    pub quadrant_name: Option<&'static str>,
    pub degenerate_reason: Option<&'static str>,
    pub median_shape: Option<f64>,
    pub feature_order: [&'static str; 5],
    pub mean_features: Option<FeatureVector>,
    pub sigma_artist: f64,
    pub era: EraBaseline,
    pub deviation: Option<FeatureDeviation>,
    pub songs: Vec<SongRow>,
}

#[derive(Debug, Serialize)]
pub struct RadarSeries {
    pub era: [f64; 5],
    pub artist: [f64; 5],
    pub song: [f64; 5],
}

#[derive(Debug, Serialize)]
pub struct SignatureDoc {
    pub artist: String,
    pub artist_key: String,
    pub decade: Decade,
    pub title: String,
    pub title_key: String,
    pub feature_order: [&'static str; 5],
    pub features: FeatureVector,
    pub deviation: FeatureDeviation,
    pub radar: RadarSeries,
}

/// Song table order: ascending avg rank, then descending weeks, then title.
pub fn song_table(songs: &[SongRecord]) -> Vec<SongRow> {
    let mut sorted: Vec<&SongRecord> = songs.iter().collect();
    sorted.sort_by(|a, b| {
        a.avg_rank
            .total_cmp(&b.avg_rank)
            .then_with(|| b.weeks.cmp(&a.weeks))
            .then_with(|| a.display_title.cmp(&b.display_title))
    });
    sorted
        .into_iter()
        .map(|s| SongRow {
            title: s.display_title.clone(),
            title_key: s.key.title_norm.clone(),
            avg_rank: s.avg_rank,
            peak_rank: s.peak_rank,
            weeks: s.weeks,
            has_features: s.features.is_some(),
        })
        .collect()
}

fn find_profile<'a>(
    bundle: &'a AnalysisBundle,
    artist: &str,
    decade: &str,
) -> Result<(&'a ArtistDecadeProfile, &'a EraBaseline), ApiError> {
    let key = normalize_text(artist);
    if bundle.artist(&key).is_none() {
        return Err(ApiError::not_found(format!("unknown artist `{artist}`")));
    }
    let decade: Decade = decade
        .parse()
        .map_err(|e: eralign_core::ingest::BadDecadeLabel| {
            ApiError::new(ErrorCode::BadRequest, e.to_string())
        })?;
    let profile = bundle
        .profile(&key, decade)
        .ok_or_else(|| ApiError::not_found(format!("no profile for `{artist}` in {decade}")))?;
    let baseline = bundle
        .baseline(decade)
        .ok_or_else(|| ApiError::not_found(format!("no era baseline for {decade}")))?;
    Ok((profile, baseline))
}

pub fn profile_doc(bundle: &AnalysisBundle, artist: &str, decade: &str) -> Result<ProfileDoc, ApiError> {
    let (p, baseline) = find_profile(bundle, artist, decade)?;
    let (quadrant_name, degenerate_reason) = match &p.alignment {
        Alignment::Classified(m) => (Some(m.quadrant.display_name()), None),
        Alignment::Degenerate { reason } => (None, Some(reason.describe())),
    };
    Ok(ProfileDoc {
        artist: p.artist.clone(),
        artist_key: p.artist_key.clone(),
        decade: p.decade,
        appearances: p.appearances,
        distinct_songs: p.distinct_songs,
        performance_score: p.performance_score,
        alignment: p.alignment,
        quadrant_name,
        degenerate_reason,
        median_shape: bundle.median_shape,
        feature_order: FEATURE_NAMES,
        mean_features: p.mean_features,
        sigma_artist: p.sigma_artist,
        era: baseline.clone(),
        deviation: p.mean_features.map(|m| deviation(&m, &baseline.centroid)),
        songs: song_table(&p.songs),
    })
}

pub fn signature_doc(
    bundle: &AnalysisBundle,
    artist: &str,
    decade: &str,
    title: &str,
) -> Result<SignatureDoc, ApiError> {
    let (p, baseline) = find_profile(bundle, artist, decade)?;
    let title_key = normalize_text(title);
    let song = p
        .songs
        .iter()
        .find(|s| s.key.title_norm == title_key)
        .ok_or_else(|| ApiError::not_found(format!("no song `{title}` in this profile")))?;
    let features = song.features.ok_or_else(|| {
        ApiError::new(
            ErrorCode::DegenerateProfile,
            format!("song `{}` has no audio features", song.display_title),
        )
    })?;
    let artist_mean = p.mean_features.ok_or_else(|| {
        ApiError::new(ErrorCode::DegenerateProfile, "profile has no mean feature vector")
    })?;
    Ok(SignatureDoc {
        artist: p.artist.clone(),
        artist_key: p.artist_key.clone(),
        decade: p.decade,
        title: song.display_title.clone(),
        title_key: song.key.title_norm.clone(),
        feature_order: FEATURE_NAMES,
        features,
        deviation: deviation(&features, &baseline.centroid),
        radar: RadarSeries {
            era: baseline.centroid.to_array(),
            artist: artist_mean.to_array(),
            song: features.to_array(),
        },
    })
}

pub fn trajectory_doc(bundle: &AnalysisBundle, artist: &str) -> Result<TrajectoryDoc, ApiError> {
    let key = normalize_text(artist);
    let (rank, ranked) = bundle
        .artists
        .iter()
        .enumerate()
        .find(|(_, a)| a.key == key)
        .ok_or_else(|| ApiError::not_found(format!("unknown artist `{artist}`")))?;
    let points = bundle
        .trajectory(&key)
        .map(|t| t.points.clone())
        .unwrap_or_default();
    let decades = bundle
        .profiles
        .iter()
        .filter(|p| p.artist_key == key)
        .map(|p| DecadeBubble {
            decade: p.decade,
            appearances: p.appearances,
            distinct_songs: p.distinct_songs,
            performance_score: p.performance_score,
            alignment: p.alignment,
        })
        .collect();
    Ok(TrajectoryDoc {
        artist: ranked.name.clone(),
        artist_key: ranked.key.clone(),
        rank: rank + 1,
        score: ranked.score,
        points,
        decades,
    })
}

async fn summary(State(bundle): State<Shared>) -> Json<Summary> {
    Json(summarize(&bundle))
}

async fn artists(State(bundle): State<Shared>) -> Json<Vec<eralign_core::RankedArtist>> {
    Json(bundle.artists.clone())
}

async fn trajectory(State(bundle): State<Shared>, Path(artist): Path<String>) -> ApiResult<TrajectoryDoc> {
    trajectory_doc(&bundle, &artist).map(Json)
}

async fn profile(
    State(bundle): State<Shared>,
    Path((artist, decade)): Path<(String, String)>,
) -> ApiResult<ProfileDoc> {
    profile_doc(&bundle, &artist, &decade).map(Json)
}

async fn signature(
    State(bundle): State<Shared>,
    Path((artist, decade, title)): Path<(String, String, String)>,
) -> ApiResult<SignatureDoc> {
    signature_doc(&bundle, &artist, &decade, &title).map(Json)
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

#[derive(Debug, Clone, Default)]
pub struct ServiceOptions {
    pub static_dir: Option<PathBuf>,
    pub cors: bool,
}

/// Builds the application router. The bundle must already be loaded.
pub fn router(bundle: Arc<AnalysisBundle>, options: &ServiceOptions) -> Router {
    let api = Router::new()
        .route("/api/summary", get(summary))
        .route("/api/artists", get(artists))
        .route("/api/artists/{artist}/trajectory", get(trajectory))
        .route("/api/artists/{artist}/decades/{decade}", get(profile))
        .route(
            "/api/artists/{artist}/decades/{decade}/songs/{title}",
            get(signature),
        )
        .route("/api", get(api_not_found))
        .route("/api/{*rest}", get(api_not_found))
        .with_state(bundle);

    let mut app = match &options.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(api_not_found),
    };
    if options.cors {
        app = app.layer(CorsLayer::permissive());
    }
    app
}
