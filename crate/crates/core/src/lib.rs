//! Positions artist–decade pairs against era baselines built from weekly
//! chart data and per-song audio features.
//!
//! The pipeline is: [`ingest`] the two CSV files, join them into
//! [`SongRecord`]s, then [`profiles::assemble_bundle`] ranks artists, builds
//! per-decade baselines, and places each artist–decade pair in the
//! shape-similarity / contrast-ratio plane. The resulting [`AnalysisBundle`]
//! is immutable and is persisted as canonical JSON by [`bundle`].

pub mod bundle;
pub mod feature;
pub mod ingest;
pub mod metrics;
pub mod profiles;
pub mod special;

use std::io::Read;

use thiserror::Error;

pub use bundle::{to_canonical_json, BundleError};
pub use feature::{FeatureDeviation, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use ingest::{
    AnalysisWindow, ChartEntry, Decade, IngestError, SongKey, SongRecord, Warning, WarningKind,
};
pub use metrics::{AlignmentMetrics, CorrelationResult, MetricsError, Quadrant};
pub use profiles::{
    Alignment, AnalysisBundle, AnalysisConfig, ArtistDecadeProfile, DegenerateReason,
    EraBaseline, ProfileError, RankedArtist, Trajectory, TrajectoryPoint,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("charts: {0}")]
    Charts(#[source] IngestError),
    #[error("features: {0}")]
    Features(#[source] IngestError),
    #[error(transparent)]
    Analysis(#[from] ProfileError),
}

/// Parses both CSV sources, joins them, and assembles a bundle.
pub fn run_pipeline<C: Read, F: Read>(
    charts: C,
    features: F,
    config: &AnalysisConfig,
) -> Result<AnalysisBundle, PipelineError> {
    let entries =
        ingest::parse_charts_in_window(charts, &config.window).map_err(PipelineError::Charts)?;
    let feature_map = ingest::parse_features(features).map_err(PipelineError::Features)?;
    let (records, warnings) = ingest::build_song_records(&entries, &feature_map);
    Ok(profiles::assemble_bundle(&records, warnings, config)?)
}
