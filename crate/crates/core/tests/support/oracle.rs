//! Straight-line reference implementation of the whole analysis, used to
//! cross-check the engine. It shares no code with the library: its own CSV
//! splitting, its own key folding, plain loops, textbook formulas, and
//! statrs for the Student-t tail.
#![allow(dead_code)]

use std::collections::HashMap;

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone)]
pub struct OracleSong {
    pub artist: String,
    pub title: String,
    pub display_artist: String,
    pub first_week: String,
    pub ranks: Vec<u32>,
    pub weeks: u32,
    pub avg_rank: f64,
    pub peak_rank: u32,
    pub decade: String,
    pub features: Option<[f64; 5]>,
}

#[derive(Debug, Clone)]
pub struct OracleBaseline {
    pub decade: String,
    pub centroid: [f64; 5],
    pub sigma: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct OracleProfile {
    pub artist: String,
    pub decade: String,
    pub appearances: u32,
    pub distinct_songs: usize,
    pub performance_score: f64,
    pub mean: Option<[f64; 5]>,
    pub sigma_artist: f64,
    /// shape, contrast (None when degenerate)
    pub position: Option<(f64, f64)>,
    pub quadrant: Option<&'static str>,
    pub deviation: Option<[f64; 5]>,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub songs: Vec<OracleSong>,
    pub artists: Vec<(String, f64)>,
    pub baselines: Vec<OracleBaseline>,
    pub profiles: Vec<OracleProfile>,
    pub median_shape: Option<f64>,
    pub r: Option<f64>,
    pub p: Option<f64>,
}

type Row = (String, u32, String);

fn fold(s: &str) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for ch in s.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            for low in ch.to_lowercase() {
                out.push(low);
            }
        }
    }
    out
}

fn decade_of(week: &str) -> String {
    format!("{}0s", &week[0..3])
}

pub fn oracle_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    2.0 * (1.0 - dist.cdf(t.abs()))
}

pub fn oracle_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..xs.len() {
        sx += xs[i];
        sy += ys[i];
    }
    let mx = sx / n;
    let my = sy / n;
    let mut num = 0.0;
    let mut dx2 = 0.0;
    let mut dy2 = 0.0;
    for i in 0..xs.len() {
        num += (xs[i] - mx) * (ys[i] - my);
        dx2 += (xs[i] - mx) * (xs[i] - mx);
        dy2 += (ys[i] - my) * (ys[i] - my);
    }
    num / (dx2 * dy2).sqrt()
}

pub fn oracle_sigma(rows: &[[f64; 5]]) -> f64 {
    let n = rows.len() as f64;
    let mut total = 0.0;
    for f in 0..5 {
        let mut sum = 0.0;
        for row in rows {
            sum += row[f];
        }
        let mean = sum / n;
        let mut sq = 0.0;
        for row in rows {
            sq += (row[f] - mean) * (row[f] - mean);
        }
        total += (sq / n).sqrt();
    }
    total / 5.0
}

pub fn oracle_mean(rows: &[[f64; 5]]) -> [f64; 5] {
    let mut out = [0.0; 5];
    for f in 0..5 {
        let mut sum = 0.0;
        for row in rows {
            sum += row[f];
        }
        out[f] = sum / rows.len() as f64;
    }
    out
}

/// `None` when either vector is constant.
pub fn oracle_centered_cosine(a: &[f64; 5], b: &[f64; 5]) -> Option<f64> {
    let ma = (a[0] + a[1] + a[2] + a[3] + a[4]) / 5.0;
    let mb = (b[0] + b[1] + b[2] + b[3] + b[4]) / 5.0;
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..5 {
        dot += (a[i] - ma) * (b[i] - mb);
        na += (a[i] - ma) * (a[i] - ma);
        nb += (b[i] - mb) * (b[i] - mb);
    }
    if a.iter().all(|x| *x == a[0]) || b.iter().all(|x| *x == b[0]) {
        return None;
    }
    Some(dot / (na.sqrt() * nb.sqrt()))
}

pub fn oracle_quadrant(shape: f64, contrast: f64, median: f64) -> &'static str {
    if shape >= median {
        if contrast >= 1.0 {
            "AmplifiedConformist"
        } else {
            "SmoothedConformist"
        }
    } else if contrast >= 1.0 {
        "PolarizedMaverick"
    } else {
        "MutedMaverick"
    }
}

/// Runs the reference analysis over the raw text of the two CSV files.
/// Assumes no quoted fields.
pub fn run(charts_csv: &str, features_csv: &str, k: usize) -> OracleResult {
    // song key -> (display artist, display title, weeks list)
    let mut order: Vec<(String, String)> = Vec::new();
    // (week, rank, artist as written) per key
    let mut rows: HashMap<(String, String), Vec<Row>> = HashMap::new();
    for line in charts_csv.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let key = (fold(parts[2]), fold(parts[3]));
        if !rows.contains_key(&key) {
            order.push(key.clone());
        }
        rows.entry(key)
            .or_default()
            .push((parts[0].to_string(), parts[1].parse().unwrap(), parts[2].to_string()));
    }

    let mut features: HashMap<(String, String), [f64; 5]> = HashMap::new();
    for line in features_csv.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let mut v = [0.0; 5];
        for i in 0..5 {
            v[i] = parts[i + 2].trim().parse().unwrap();
        }
        features.insert((fold(parts[0]), fold(parts[1])), v);
    }

    let mut songs = Vec::new();
    for key in &order {
        let r = &rows[key];
        let mut first = r[0].0.clone();
        let mut display = r[0].2.clone();
        let mut sum = 0u32;
        let mut peak = 1000u32;
        let mut ranks = Vec::new();
        for (week, rank, artist) in r {
            if *week < first {
                first = week.clone();
                display = artist.clone();
            }
            sum += rank;
            if *rank < peak {
                peak = *rank;
            }
            ranks.push(*rank);
        }
        songs.push(OracleSong {
            artist: key.0.clone(),
            title: key.1.clone(),
            display_artist: display,
            decade: decade_of(&first),
            first_week: first,
            weeks: r.len() as u32,
            avg_rank: sum as f64 / r.len() as f64,
            peak_rank: peak,
            ranks,
            features: features.get(key).copied(),
        });
    }

    // artist scores
    let mut artist_names: Vec<String> = Vec::new();
    for s in &songs {
        if !artist_names.contains(&s.artist) {
            artist_names.push(s.artist.clone());
        }
    }
    let mut artists = Vec::new();
    for a in &artist_names {
        let mut total = 0.0;
        let mut n = 0;
        for s in &songs {
            if &s.artist == a {
                total += s.weeks as f64 / s.avg_rank;
                n += 1;
            }
        }
        artists.push((a.clone(), total * (1.0 + n as f64).ln()));
    }
    artists.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
    artists.truncate(k);

    // baselines
    let mut decades: Vec<String> = Vec::new();
    for s in &songs {
        if !decades.contains(&s.decade) {
            decades.push(s.decade.clone());
        }
    }
    decades.sort();
    let mut baselines = Vec::new();
    for d in &decades {
        let mut vecs = Vec::new();
        for s in &songs {
            if &s.decade == d {
                if let Some(f) = s.features {
                    vecs.push(f);
                }
            }
        }
        baselines.push(OracleBaseline {
            decade: d.clone(),
            centroid: oracle_mean(&vecs),
            sigma: oracle_sigma(&vecs),
            count: vecs.len(),
        });
    }

    // profiles
    let mut profiles = Vec::new();
    for (artist, _) in &artists {
        for (di, d) in decades.iter().enumerate() {
            let mut appearances = 0;
            let mut contrib = 0.0;
            let mut count = 0;
            let mut vecs = Vec::new();
            for s in &songs {
                if &s.artist == artist && &s.decade == d {
                    appearances += s.weeks;
                    contrib += s.weeks as f64 / s.avg_rank;
                    count += 1;
                    if let Some(f) = s.features {
                        vecs.push(f);
                    }
                }
            }
            if count == 0 {
                continue;
            }
            let base = &baselines[di];
            let (mean, sigma, position) = if vecs.is_empty() {
                (None, 0.0, None)
            } else {
                let mean = oracle_mean(&vecs);
                let sigma = oracle_sigma(&vecs);
                let pos = oracle_centered_cosine(&mean, &base.centroid)
                    .map(|shape| (shape, sigma / base.sigma));
                (Some(mean), sigma, pos)
            };
            let deviation = mean.map(|m| {
                let mut dev = [0.0; 5];
                for i in 0..5 {
                    dev[i] = m[i] - base.centroid[i];
                }
                dev
            });
            profiles.push(OracleProfile {
                artist: artist.clone(),
                decade: d.clone(),
                appearances,
                distinct_songs: count,
                performance_score: contrib * count as f64,
                mean,
                sigma_artist: sigma,
                position,
                quadrant: None,
                deviation,
            });
        }
    }

    let mut shapes = Vec::new();
    let mut contrasts = Vec::new();
    for p in &profiles {
        if let Some((s, c)) = p.position {
            shapes.push(s);
            contrasts.push(c);
        }
    }
    let median_shape = if shapes.is_empty() {
        None
    } else {
        let mut sorted = shapes.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        Some(if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        })
    };
    if let Some(m) = median_shape {
        for p in profiles.iter_mut() {
            if let Some((s, c)) = p.position {
                p.quadrant = Some(oracle_quadrant(s, c, m));
            }
        }
    }
    let (r, p) = if shapes.len() >= 3 {
        let r = oracle_pearson(&shapes, &contrasts);
        (Some(r), Some(oracle_p_value(r, shapes.len())))
    } else {
        (None, None)
    };

    OracleResult {
        songs,
        artists,
        baselines,
        profiles,
        median_shape,
        r,
        p,
    }
}
