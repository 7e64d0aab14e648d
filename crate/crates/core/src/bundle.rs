//! Canonical JSON form of an [`AnalysisBundle`].
//!
//! Canonical means: object keys sorted lexicographically at every level,
//! floats in shortest round-trip form, two-space indentation, UTF-8, one
//! trailing newline. Two equal bundles always serialize to identical bytes.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::metrics::{classify_quadrant, median};
use crate::profiles::{Alignment, AnalysisBundle};

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot read bundle {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bundle is not valid JSON for this schema: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bundle violates an invariant: {0}")]
    Invalid(String),
}

fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k, sort_keys(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Canonical JSON for any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let value = sort_keys(serde_json::to_value(value)?);
    let mut out = serde_json::to_string_pretty(&value)?;
    out.push('\n');
    Ok(out)
}

impl AnalysisBundle {
    pub fn to_canonical_json(&self) -> String {
        // every float in a bundle is finite, so serialization cannot fail
        to_canonical_json(self).expect("bundle serializes")
    }

    /// Parses and validates a bundle document.
    pub fn from_json(text: &str) -> Result<Self, BundleError> {
        let bundle: AnalysisBundle = serde_json::from_str(text)?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn load(path: &Path) -> Result<Self, BundleError> {
        let text = std::fs::read_to_string(path).map_err(|source| BundleError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Checks the structural invariants a well-formed bundle must satisfy.
    pub fn validate(&self) -> Result<(), BundleError> {
        let fail = |msg: String| Err(BundleError::Invalid(msg));

        for pair in self.artists.windows(2) {
            let ordered = pair[0].score > pair[1].score
                || (pair[0].score == pair[1].score && pair[0].key < pair[1].key);
            if !ordered {
                return fail(format!(
                    "artists out of order: {} before {}",
                    pair[0].key, pair[1].key
                ));
            }
        }

        for p in &self.profiles {
            let weeks: u32 = p.songs.iter().map(|s| s.weeks).sum();
            if weeks != p.appearances || p.songs.len() != p.distinct_songs {
                return fail(format!(
                    "profile {} {} has inconsistent song aggregates",
                    p.artist_key, p.decade
                ));
            }
            if self.baseline(p.decade).is_none() {
                return fail(format!("profile {} {} has no era baseline", p.artist_key, p.decade));
            }
            for s in &p.songs {
                if s.weeks as usize != s.entries.len() || f64::from(s.peak_rank) > s.avg_rank {
                    return fail(format!("song {} has inconsistent chart aggregates", s.key));
                }
            }
        }

        let shapes: Vec<f64> = self
            .classified_profiles()
            .map(|(_, m)| m.shape_similarity)
            .collect();
        match (median(&shapes), self.median_shape) {
            (None, None) => {}
            (Some(m), Some(stored)) if m == stored => {}
            _ => return fail("median_shape does not match the classified profiles".into()),
        }
        if let Some(c) = &self.correlation {
            if c.n != shapes.len() {
                return fail(format!(
                    "correlation n = {} but {} profiles are classified",
                    c.n,
                    shapes.len()
                ));
            }
        }
        if let Some(median_shape) = self.median_shape {
            for p in &self.profiles {
                if let Alignment::Classified(m) = &p.alignment {
                    if classify_quadrant(m.shape_similarity, m.contrast_ratio, median_shape)
                        != m.quadrant
                    {
                        return fail(format!(
                            "profile {} {} has a quadrant inconsistent with its position",
                            p.artist_key, p.decade
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}
