//! Five-component audio feature vectors.
//!
//! Component order is fixed everywhere: valence, energy, danceability,
//! acousticness, liveness.

use serde::{Deserialize, Serialize};

/// Number of audio features tracked per song.
pub const FEATURE_COUNT: usize = 5;

/// Feature names in canonical order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] =
    ["valence", "energy", "danceability", "acousticness", "liveness"];

/// Audio features of a song (or a mean over songs). Every component lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub valence: f64,
    pub energy: f64,
    pub danceability: f64,
    pub acousticness: f64,
    pub liveness: f64,
}

impl FeatureVector {
    /// Builds a vector from components in canonical order, rejecting anything outside `[0, 1]`.
    ///
    /// On failure the index of the first offending component is returned.
    pub fn new(components: [f64; FEATURE_COUNT]) -> Result<Self, usize> {
        if let Some(idx) = components
            .iter()
            .position(|v| !(0.0..=1.0).contains(v))
        {
            return Err(idx);
        }
        Ok(Self::from_array_unchecked(components))
    }

    pub(crate) fn from_array_unchecked(c: [f64; FEATURE_COUNT]) -> Self {
        Self {
            valence: c[0],
            energy: c[1],
            danceability: c[2],
            acousticness: c[3],
            liveness: c[4],
        }
    }

    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.valence,
            self.energy,
            self.danceability,
            self.acousticness,
            self.liveness,
        ]
    }

    /// Unweighted per-feature mean. `None` for an empty slice.
    pub fn mean_of(vectors: &[FeatureVector]) -> Option<FeatureVector> {
        if vectors.is_empty() {
            return None;
        }
        let n = vectors.len() as f64;
        let mut sums = [0.0; FEATURE_COUNT];
        for v in vectors {
            for (s, x) in sums.iter_mut().zip(v.to_array()) {
                *s += x;
            }
        }
        // a mean of values in [0, 1] can drift past the ends by one ulp
        Some(Self::from_array_unchecked(
            sums.map(|s| (s / n).clamp(0.0, 1.0)),
        ))
    }
}

/// Signed per-feature difference between a subject profile and an era centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureDeviation {
    pub valence: f64,
    pub energy: f64,
    pub danceability: f64,
    pub acousticness: f64,
    pub liveness: f64,
}

impl FeatureDeviation {
    pub fn from_array(c: [f64; FEATURE_COUNT]) -> Self {
        Self {
            valence: c[0],
            energy: c[1],
            danceability: c[2],
            acousticness: c[3],
            liveness: c[4],
        }
    }

    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.valence,
            self.energy,
            self.danceability,
            self.acousticness,
            self.liveness,
        ]
    }
}
