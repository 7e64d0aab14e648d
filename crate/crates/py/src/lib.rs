//! Python bindings: the scoring and alignment kernels as plain functions, and
//! a `Bundle` class wrapping a built or loaded analysis bundle.

use std::fs::File;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use eralign_core::metrics;
use eralign_core::{
    ingest, run_pipeline, to_canonical_json, AnalysisBundle, AnalysisConfig, Decade,
    FeatureVector,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(components: [f64; 5]) -> PyResult<FeatureVector> {
    FeatureVector::new(components).map_err(|i| {
        PyValueError::new_err(format!(
            "feature {} = {} is outside [0, 1]",
            eralign_core::FEATURE_NAMES[i],
            components[i]
        ))
    })
}

/// Serializes through canonical JSON and hands the result to Python's `json`.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = to_canonical_json(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Normalized `(artist, title)` join key.
#[pyfunction]
fn normalize_key(artist: &str, title: &str) -> (String, String) {
    let key = ingest::normalize_key(artist, title);
    (key.artist_norm, key.title_norm)
}

#[pyfunction]
fn centered_cosine(a: [f64; 5], b: [f64; 5]) -> PyResult<f64> {
    metrics::centered_cosine(&vector(a)?, &vector(b)?).map_err(value_err)
}

#[pyfunction]
fn dispersion(rows: Vec<[f64; 5]>) -> PyResult<f64> {
    let vectors = rows.into_iter().map(vector).collect::<PyResult<Vec<_>>>()?;
    metrics::dispersion(&vectors).map_err(value_err)
}

#[pyfunction]
fn contrast_ratio(sigma_artist: f64, sigma_era: f64) -> PyResult<f64> {
    metrics::contrast_ratio(sigma_artist, sigma_era).map_err(value_err)
}

/// Quadrant name, e.g. `"AmplifiedConformist"`.
#[pyfunction]
fn classify_quadrant(shape: f64, contrast: f64, median_shape: f64) -> String {
    metrics::classify_quadrant(shape, contrast, median_shape).to_string()
}

/// `(r, p_two_sided, n)`.
#[pyfunction]
fn pearson(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<(f64, f64, usize)> {
    let c = metrics::pearson(&xs, &ys).map_err(value_err)?;
    Ok((c.r, c.p_two_sided, c.n))
}

#[pyfunction]
fn pearson_p_value(r: f64, n: usize) -> PyResult<f64> {
    metrics::pearson_p_value(r, n).map_err(value_err)
}

#[pyfunction]
fn song_contribution(weeks: u32, avg_rank: f64) -> PyResult<f64> {
    metrics::song_contribution(weeks, avg_rank).map_err(value_err)
}

#[pyfunction]
fn artist_rank_score(contributions: Vec<f64>) -> PyResult<f64> {
    metrics::artist_rank_score(&contributions, contributions.len()).map_err(value_err)
}

#[pyfunction]
fn decade_performance_score(contributions: Vec<f64>) -> PyResult<f64> {
    metrics::decade_performance_score(&contributions, contributions.len()).map_err(value_err)
}

/// Component-wise `subject - era_centroid`.
#[pyfunction]
fn deviation(subject: [f64; 5], era_centroid: [f64; 5]) -> PyResult<[f64; 5]> {
    Ok(metrics::deviation(&vector(subject)?, &vector(era_centroid)?).to_array())
}

#[pyclass(module = "eralign", frozen)]
struct Bundle {
    inner: AnalysisBundle,
}

#[pymethods]
impl Bundle {
    /// Runs the full analysis over a chart CSV and a feature CSV.
    #[staticmethod]
    #[pyo3(signature = (charts, features, top = 10, min_songs_per_decade = 1, deterministic = true))]
    fn build(
        charts: PathBuf,
        features: PathBuf,
        top: usize,
        min_songs_per_decade: usize,
        deterministic: bool,
    ) -> PyResult<Self> {
        let open = |p: &PathBuf| {
            File::open(p).map_err(|e| PyIOError::new_err(format!("{}: {e}", p.display())))
        };
        let config = AnalysisConfig {
            top_k: top,
            min_songs_per_decade,
            // a fixed timestamp makes identical inputs serialize identically
            created_at: if deterministic {
                chrono::DateTime::UNIX_EPOCH
            } else {
                chrono::Utc::now()
            },
            ..AnalysisConfig::default()
        };
        let inner = run_pipeline(open(&charts)?, open(&features)?, &config).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = AnalysisBundle::load(&path).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = AnalysisBundle::from_json(text).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_canonical_json()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        std::fs::write(&path, self.inner.to_canonical_json())
            .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))
    }

    #[getter]
    fn median_shape(&self) -> Option<f64> {
        self.inner.median_shape
    }

    /// `(r, p_two_sided, n)` or `None` when the correlation was skipped.
    #[getter]
    fn correlation(&self) -> Option<(f64, f64, usize)> {
        self.inner.correlation.map(|c| (c.r, c.p_two_sided, c.n))
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let b = &self.inner;
        let summary = serde_json::json!({
            "artist_count": b.artists.len(),
            "profile_count": b.profiles.len(),
            "classified_count": b.classified_profiles().count(),
            "median_shape": b.median_shape,
            "correlation": b.correlation,
            "warning_count": b.warnings.len(),
        });
        to_py(py, &summary)
    }

    fn artists<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.artists)
    }

    fn profiles<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.profiles)
    }

    fn baselines<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.baselines)
    }

    fn warnings<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.warnings)
    }

    /// One artist-decade profile; `artist` may be a display name or a key.
    fn profile<'py>(&self, py: Python<'py>, artist: &str, decade: &str) -> PyResult<Bound<'py, PyAny>> {
        let decade: Decade = decade.parse().map_err(value_err)?;
        let key = ingest::normalize_text(artist);
        let profile = self
            .inner
            .profile(&key, decade)
            .ok_or_else(|| PyKeyError::new_err(format!("no profile for {artist} in {decade}")))?;
        to_py(py, profile)
    }

    fn trajectory<'py>(&self, py: Python<'py>, artist: &str) -> PyResult<Bound<'py, PyAny>> {
        let key = ingest::normalize_text(artist);
        let trajectory = self
            .inner
            .trajectory(&key)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown artist {artist}")))?;
        to_py(py, trajectory)
    }

    fn __len__(&self) -> usize {
        self.inner.profiles.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Bundle(artists={}, profiles={}, median_shape={:?})",
            self.inner.artists.len(),
            self.inner.profiles.len(),
            self.inner.median_shape
        )
    }
}

#[pymodule]
fn eralign(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize_key, m)?)?;
    m.add_function(wrap_pyfunction!(centered_cosine, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(contrast_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(classify_quadrant, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_p_value, m)?)?;
    m.add_function(wrap_pyfunction!(song_contribution, m)?)?;
    m.add_function(wrap_pyfunction!(artist_rank_score, m)?)?;
    m.add_function(wrap_pyfunction!(decade_performance_score, m)?)?;
    m.add_function(wrap_pyfunction!(deviation, m)?)?;
    m.add_class::<Bundle>()?;
    m.add("FEATURE_NAMES", eralign_core::FEATURE_NAMES.to_vec())?;
    Ok(())
}
