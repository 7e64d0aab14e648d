//! Randomized checks on the scoring and alignment kernels. Each check drives
//! its own `TestRunner` so the same code serves the regular test suite and
//! the acceptance harness.

use chrono::NaiveDate;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use eralign_core::ingest::build_song_records;
use eralign_core::metrics::{
    artist_rank_score, centered_cosine, classify_quadrant, contrast_ratio, dispersion, pearson,
    pearson_p_value, Quadrant,
};
use eralign_core::{ChartEntry, FeatureVector};

const TOL: f64 = 1e-9;

pub type Check = fn(u32) -> Result<(), String>;

pub const ALL: [(&str, Check); 10] = [
    ("centered_cosine range and symmetry", cosine_range_and_symmetry),
    ("centered_cosine offset and scale invariance", cosine_offset_and_scale),
    ("dispersion permutation invariance", dispersion_permutation),
    ("dispersion zero iff identical", dispersion_zero_iff_identical),
    ("contrast_ratio(s, s) = 1", contrast_of_equal_sigmas),
    ("quadrant totality and partition", quadrant_partition),
    ("peak <= avg <= 100", peak_avg_bounds),
    ("artist_rank_score grows when a song is appended", rank_score_monotone),
    ("pearson affine invariance", pearson_affine),
    ("p-value monotone in |r|", p_value_monotone),
];

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn fv(c: [f64; 5]) -> FeatureVector {
    FeatureVector::new(c).unwrap()
}

fn centered_norm(c: &[f64; 5]) -> f64 {
    let m = c.iter().sum::<f64>() / 5.0;
    c.iter().map(|x| (x - m) * (x - m)).sum::<f64>().sqrt()
}

fn unit5() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(0.0f64..=1.0)
}

pub fn cosine_range_and_symmetry(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(unit5(), unit5()), |(a, b)| {
            let (va, vb) = (fv(a), fv(b));
            match (centered_cosine(&va, &vb), centered_cosine(&vb, &va)) {
                (Ok(x), Ok(y)) => {
                    check((-1.0..=1.0).contains(&x), || format!("out of range: {x}"))?;
                    check((x - y).abs() <= TOL, || format!("asymmetric: {x} vs {y}"))
                }
                (Err(_), Err(_)) => Ok(()),
                other => Err(TestCaseError::fail(format!("one-sided failure: {other:?}"))),
            }
        })
        .map_err(|e| e.to_string())
}

pub fn cosine_offset_and_scale(cases: u32) -> Result<(), String> {
    let strategy = (
        prop::array::uniform5(0.0f64..=0.5),
        unit5(),
        0.0f64..=0.5,
        0.05f64..=1.0,
    );
    runner(cases)
        .run(&strategy, |(a, b, offset, scale)| {
            prop_assume!(centered_norm(&a) > 1e-3 && centered_norm(&b) > 1e-3);
            let base = centered_cosine(&fv(a), &fv(b)).unwrap();
            let shifted = centered_cosine(&fv(a.map(|x| x + offset)), &fv(b)).unwrap();
            let scaled = centered_cosine(&fv(a), &fv(b.map(|x| x * scale))).unwrap();
            check((base - shifted).abs() <= TOL, || format!("offset: {base} vs {shifted}"))?;
            check((base - scaled).abs() <= TOL, || format!("scale: {base} vs {scaled}"))
        })
        .map_err(|e| e.to_string())
}

pub fn dispersion_permutation(cases: u32) -> Result<(), String> {
    let strategy = prop::collection::vec(unit5(), 1..12)
        .prop_flat_map(|rows| (Just(rows.clone()), Just(rows).prop_shuffle()));
    runner(cases)
        .run(&strategy, |(rows, shuffled)| {
            let a = dispersion(&rows.iter().copied().map(fv).collect::<Vec<_>>()).unwrap();
            let b = dispersion(&shuffled.iter().copied().map(fv).collect::<Vec<_>>()).unwrap();
            check((a - b).abs() <= TOL, || format!("{a} vs {b}"))
        })
        .map_err(|e| e.to_string())
}

pub fn dispersion_zero_iff_identical(cases: u32) -> Result<(), String> {
    let strategy = (unit5(), 1usize..12, prop::collection::vec(unit5(), 2..12));
    runner(cases)
        .run(&strategy, |(row, copies, varied)| {
            let same = dispersion(&vec![fv(row); copies]).unwrap();
            check(same == 0.0, || format!("identical rows gave {same}"))?;
            let all_equal = varied.iter().all(|r| r == &varied[0]);
            let d = dispersion(&varied.iter().copied().map(fv).collect::<Vec<_>>()).unwrap();
            check((d == 0.0) == all_equal, || format!("dispersion {d}, identical={all_equal}"))
        })
        .map_err(|e| e.to_string())
}

pub fn contrast_of_equal_sigmas(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(1e-9f64..10.0), |s| {
            let c = contrast_ratio(s, s).unwrap();
            check(c == 1.0, || format!("contrast({s}, {s}) = {c}"))
        })
        .map_err(|e| e.to_string())
}

pub fn quadrant_partition(cases: u32) -> Result<(), String> {
    let strategy = (-1.0f64..=1.0, 0.0f64..=3.0, -1.0f64..=1.0);
    runner(cases)
        .run(&strategy, |(shape, contrast, median)| {
            let q = classify_quadrant(shape, contrast, median);
            let matching = Quadrant::ALL
                .iter()
                .filter(|c| c.high_shape() == (shape >= median) && c.high_contrast() == (contrast >= 1.0))
                .count();
            check(matching == 1, || format!("{matching} quadrants match"))?;
            check(q.high_shape() == (shape >= median), || format!("{q} shape side"))?;
            check(q.high_contrast() == (contrast >= 1.0), || format!("{q} contrast side"))
        })
        .map_err(|e| e.to_string())
}

pub fn peak_avg_bounds(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&prop::collection::vec(1u32..=100, 1..60), |ranks| {
            let start = NaiveDate::from_ymd_opt(1980, 1, 5).unwrap();
            let entries: Vec<ChartEntry> = ranks
                .iter()
                .enumerate()
                .map(|(i, &rank)| ChartEntry {
                    artist_name: "A".into(),
                    song_title: "S".into(),
                    week: start + chrono::Duration::weeks(i as i64),
                    rank,
                })
                .collect();
            let (records, _) = build_song_records(&entries, &Default::default());
            let s = &records[0];
            check(
                1 <= s.peak_rank && f64::from(s.peak_rank) <= s.avg_rank && s.avg_rank <= 100.0,
                || format!("peak {} avg {}", s.peak_rank, s.avg_rank),
            )
        })
        .map_err(|e| e.to_string())
}

pub fn rank_score_monotone(cases: u32) -> Result<(), String> {
    let contribution = (1u32..=60, 1.0f64..=100.0).prop_map(|(w, r)| f64::from(w) / r);
    let strategy = (prop::collection::vec(contribution.clone(), 0..20), contribution);
    runner(cases)
        .run(&strategy, |(mut songs, extra)| {
            let before = artist_rank_score(&songs, songs.len()).unwrap();
            songs.push(extra);
            let after = artist_rank_score(&songs, songs.len()).unwrap();
            check(after > before, || format!("{before} -> {after}"))
        })
        .map_err(|e| e.to_string())
}

pub fn pearson_affine(cases: u32) -> Result<(), String> {
    let strategy = (3usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
            prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0, 7.5]),
            -5.0f64..5.0,
            prop::sample::select(vec![-2.0, -0.125, 0.5, 4.0]),
            -5.0f64..5.0,
        )
    });
    runner(cases)
        .run(&strategy, |(xs, ys, a, b, c, d)| {
            let Ok(base) = pearson(&xs, &ys) else {
                return Ok(());
            };
            let tx: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let ty: Vec<f64> = ys.iter().map(|y| c * y + d).collect();
            let moved = pearson(&tx, &ty).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let expected = (a * c).signum() * base.r;
            check((moved.r - expected).abs() <= 1e-9, || format!("{} vs {expected}", moved.r))
        })
        .map_err(|e| e.to_string())
}

pub fn p_value_monotone(cases: u32) -> Result<(), String> {
    let strategy = (3usize..200, -0.999f64..0.999, -0.999f64..0.999);
    runner(cases)
        .run(&strategy, |(n, r1, r2)| {
            let (lo, hi) = if r1.abs() <= r2.abs() { (r1, r2) } else { (r2, r1) };
            let p_lo = pearson_p_value(lo, n).unwrap();
            let p_hi = pearson_p_value(hi, n).unwrap();
            check((0.0..=1.0).contains(&p_lo) && (0.0..=1.0).contains(&p_hi), || {
                format!("p out of range: {p_lo}, {p_hi}")
            })?;
            check(p_hi <= p_lo + 1e-12, || format!("|r| {lo}->{hi} but p {p_lo}->{p_hi}"))
        })
        .map_err(|e| e.to_string())
}
