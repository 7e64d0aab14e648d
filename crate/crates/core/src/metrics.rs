//! Scoring and alignment kernel.
//!
//! Everything here is a pure function over plain values. Positions in the
//! alignment space use two axes:
//!
//! * shape similarity: cosine of the two feature vectors after each has been
//!   centered on its own component mean, so only the pattern across features
//!   matters, not the overall level;
//! * contrast ratio: `sigma_artist / sigma_era`, where each sigma is the mean of
//!   the per-feature population standard deviations across songs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::{FeatureDeviation, FeatureVector, FEATURE_COUNT};
use crate::special::student_t_two_sided;

/// Contrast ratio at which an artist is exactly as dispersed as the era.
pub const CONTRAST_BOUNDARY: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("average rank {0} outside [1, 100]")]
    BadAvgRank(f64),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("feature vector is constant and has no direction after centering")]
    DegenerateVector,
    #[error("no feature vectors given")]
    EmptyInput,
    #[error("artist dispersion {0} is negative")]
    NegativeDispersion(f64),
    #[error("era dispersion {0} is not positive")]
    ZeroEraDispersion(f64),
    #[error("need at least 3 points for a correlation test, got {0}")]
    TooFewPoints(usize),
    #[error("input has zero variance")]
    ConstantInput,
}

/// One song's weight in the scoring formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SongContribution {
    pub weeks: u32,
    pub avg_rank: f64,
    pub value: f64,
}

impl SongContribution {
    pub fn new(weeks: u32, avg_rank: f64) -> Result<Self, MetricsError> {
        Ok(Self {
            weeks,
            avg_rank,
            value: song_contribution(weeks, avg_rank)?,
        })
    }
}

/// `weeks / avg_rank`.
pub fn song_contribution(weeks: u32, avg_rank: f64) -> Result<f64, MetricsError> {
    if !(1.0..=100.0).contains(&avg_rank) {
        return Err(MetricsError::BadAvgRank(avg_rank));
    }
    Ok(f64::from(weeks) / avg_rank)
}

fn check_len(contributions: &[f64], songs: usize) -> Result<(), MetricsError> {
    if contributions.len() != songs {
        return Err(MetricsError::LengthMismatch {
            left: contributions.len(),
            right: songs,
        });
    }
    Ok(())
}

/// `(Σ contributions) · ln(1 + distinct_songs)`, used to rank artists over the whole window.
pub fn artist_rank_score(contributions: &[f64], distinct_songs: usize) -> Result<f64, MetricsError> {
    check_len(contributions, distinct_songs)?;
    let total: f64 = contributions.iter().sum();
    Ok(total * (1.0 + distinct_songs as f64).ln())
}

/// `(Σ contributions) · distinct_songs_in_decade`.
pub fn decade_performance_score(
    contributions: &[f64],
    distinct_songs_in_decade: usize,
) -> Result<f64, MetricsError> {
    check_len(contributions, distinct_songs_in_decade)?;
    let total: f64 = contributions.iter().sum();
    Ok(total * distinct_songs_in_decade as f64)
}

fn centered(v: &FeatureVector) -> [f64; FEATURE_COUNT] {
    let c = v.to_array();
    let mean = c.iter().sum::<f64>() / FEATURE_COUNT as f64;
    c.map(|x| x - mean)
}

fn is_constant(v: &FeatureVector) -> bool {
    let c = v.to_array();
    c.iter().all(|&x| x == c[0])
}

/// Centered cosine similarity in `[-1, 1]`.
pub fn centered_cosine(a: &FeatureVector, b: &FeatureVector) -> Result<f64, MetricsError> {
    if is_constant(a) || is_constant(b) {
        return Err(MetricsError::DegenerateVector);
    }
    let (ca, cb) = (centered(a), centered(b));
    let dot: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
    let na: f64 = ca.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = cb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(MetricsError::DegenerateVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Mean over the five features of the per-feature population standard deviation.
///
/// Returns exactly `0.0` when every vector is identical.
pub fn dispersion(song_features: &[FeatureVector]) -> Result<f64, MetricsError> {
    let first = song_features.first().ok_or(MetricsError::EmptyInput)?.to_array();
    let n = song_features.len() as f64;

    let mut sigma_sum = 0.0;
    for (f, &pivot) in first.iter().enumerate() {
        // shift by the first value so identical columns give exact zeros
        let mean_shift = song_features
            .iter()
            .map(|v| v.to_array()[f] - pivot)
            .sum::<f64>()
            / n;
        let mean = pivot + mean_shift;
        let variance = song_features
            .iter()
            .map(|v| {
                let d = v.to_array()[f] - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        sigma_sum += variance.sqrt();
    }
    Ok(sigma_sum / FEATURE_COUNT as f64)
}

pub fn contrast_ratio(sigma_artist: f64, sigma_era: f64) -> Result<f64, MetricsError> {
    if sigma_era.is_nan() || sigma_era <= 0.0 || sigma_era.is_infinite() {
        return Err(MetricsError::ZeroEraDispersion(sigma_era));
    }
    if sigma_artist.is_nan() || sigma_artist < 0.0 {
        return Err(MetricsError::NegativeDispersion(sigma_artist));
    }
    Ok(sigma_artist / sigma_era)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    AmplifiedConformist,
    SmoothedConformist,
    PolarizedMaverick,
    MutedMaverick,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::AmplifiedConformist,
        Quadrant::SmoothedConformist,
        Quadrant::PolarizedMaverick,
        Quadrant::MutedMaverick,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            Quadrant::AmplifiedConformist => "Amplified Conformist",
            Quadrant::SmoothedConformist => "Smoothed Conformist",
            Quadrant::PolarizedMaverick => "Polarized Maverick",
            Quadrant::MutedMaverick => "Muted Maverick",
        }
    }

    pub fn high_shape(self) -> bool {
        matches!(self, Quadrant::AmplifiedConformist | Quadrant::SmoothedConformist)
    }

    pub fn high_contrast(self) -> bool {
        matches!(self, Quadrant::AmplifiedConformist | Quadrant::PolarizedMaverick)
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quadrant::AmplifiedConformist => "AmplifiedConformist",
            Quadrant::SmoothedConformist => "SmoothedConformist",
            Quadrant::PolarizedMaverick => "PolarizedMaverick",
            Quadrant::MutedMaverick => "MutedMaverick",
        };
        f.write_str(s)
    }
}

/// Both boundaries are closed on the high side.
pub fn classify_quadrant(shape: f64, contrast: f64, median_shape: f64) -> Quadrant {
    let high_shape = shape >= median_shape;
    let high_contrast = contrast >= CONTRAST_BOUNDARY;
    match (high_shape, high_contrast) {
        (true, true) => Quadrant::AmplifiedConformist,
        (true, false) => Quadrant::SmoothedConformist,
        (false, true) => Quadrant::PolarizedMaverick,
        (false, false) => Quadrant::MutedMaverick,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentMetrics {
    pub shape_similarity: f64,
    pub contrast_ratio: f64,
    pub quadrant: Quadrant,
}

/// Component-wise `subject - era_centroid`.
pub fn deviation(subject: &FeatureVector, era_centroid: &FeatureVector) -> FeatureDeviation {
    let (s, c) = (subject.to_array(), era_centroid.to_array());
    FeatureDeviation::from_array(std::array::from_fn(|i| s[i] - c[i]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_two_sided: f64,
    pub n: usize,
}

/// Two-sided p-value of a sample correlation `r` over `n` points.
pub fn pearson_p_value(r: f64, n: usize) -> Result<f64, MetricsError> {
    if n < 3 {
        return Err(MetricsError::TooFewPoints(n));
    }
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    let t = r * (df / denom).sqrt();
    Ok(student_t_two_sided(t, df).clamp(0.0, 1.0))
}

/// Sample Pearson correlation with its two-sided Student-t p-value.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(MetricsError::TooFewPoints(n));
    }
    if xs.iter().all(|&x| x == xs[0]) || ys.iter().all(|&y| y == ys[0]) {
        return Err(MetricsError::ConstantInput);
    }

    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ConstantInput);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(CorrelationResult {
        r,
        p_two_sided: pearson_p_value(r, n)?,
        n,
    })
}

/// Median with the even-count rule "mean of the two middle values".
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}
