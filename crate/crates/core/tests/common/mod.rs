//! Random instances and property checks shared by the property and
//! acceptance suites. Each check returns a description of the first
//! violation it finds.

#![allow(dead_code)]

use hexbucket::cases::delta_p_poly;
use hexbucket::datagen::{generate_clustered, GenConfig};
use hexbucket::estimate::{max_count_from, threshold_range_from};
use hexbucket::sweep::{build_time_partition, interval_extrema, sweep_intervals};
use hexbucket::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<(), String>;

/// A small clustered data set in `[0, 20]^6`, its index and a query box
/// centered near one of the points.
pub struct Instance {
    pub points: Vec<Hex6>,
    pub idx: MovingIndex,
    pub bx: QueryBox,
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = GenConfig {
        n: rng.random_range(20..120),
        clusters: rng.random_range(1..5),
        lower: 0.0,
        upper: 20.0,
        spread: rng.random_range(0.2..1.0),
        seed,
    };
    let points = generate_clustered(&gen).unwrap();
    let div = rng.random_range(1..=4);
    let idx = MovingIndex::from_points(GridConfig::uniform(0.0, 20.0, div), &points).unwrap();
    let bx = loop {
        let c = points[rng.random_range(0..points.len())];
        let a = Hex6(std::array::from_fn(|i| c.0[i] - rng.random_range(0.5..6.0)));
        let b = Hex6(std::array::from_fn(|i| c.0[i] + rng.random_range(0.5..6.0)));
        let l = rng.random_range(0.1..3.0);
        let t = TimeInterval::new(l, l + rng.random_range(0.2..5.0));
        if let Ok(bx) = normalize_query(a, b, t) {
            break bx;
        }
    };
    Instance { points, idx, bx }
}

/// Every bucket's expected share stays within `[0, b/n]` on every interval.
pub fn band_nonnegative(seed: u64) -> Check {
    let Instance { idx, bx, .. } = instance(seed);
    let n = idx.n();
    let part = build_time_partition(&idx, &bx);
    for iv in part.intervals() {
        for b in idx.buckets() {
            let poly = delta_p_poly(b, &bx, iv, n);
            let cap = b.count as f64 / n as f64;
            for k in 0..100 {
                let t = iv.l + (k as f64 + 0.5) / 100.0 * iv.len();
                let v = poly.eval(t);
                if !(v >= -1e-9 && v <= cap + 1e-9) {
                    return Err(format!("seed {seed}: bucket {:?} value {v} at t={t}, cap {cap}", b.id));
                }
            }
        }
    }
    Ok(())
}

/// The expected count does not jump across interval boundaries.
pub fn count_continuous(seed: u64) -> Check {
    let Instance { idx, bx, .. } = instance(seed);
    let n = idx.n() as f64;
    let mut pieces = Vec::new();
    sweep_intervals(&idx, &bx, &SweepParams::default(), |iv, p| pieces.push((iv, *p)));
    let eps = 1e-7;
    for w in pieces.windows(2) {
        let (a, pa) = &w[0];
        let (_, pb) = &w[1];
        let tb = a.u;
        let jump = n * (pa.eval(tb - eps) - pb.eval(tb + eps)).abs();
        if jump > 1e-5 * n {
            return Err(format!("seed {seed}: jump {jump} at t={tb}"));
        }
    }
    Ok(())
}

fn two_thresholds(seed: u64, top: f64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let a = rng.random_range(-0.5..top);
    let b = rng.random_range(-0.5..top);
    (a.min(b), a.max(b))
}

/// A larger threshold only drops intervals.
pub fn threshold_monotone(seed: u64) -> Check {
    let Instance { idx, bx, .. } = instance(seed);
    let s = interval_extrema(&idx, &bx, Extremum::Max, &SweepParams::default());
    let (m1, m2) = two_thresholds(seed, idx.n() as f64);
    let lo = threshold_range_from(&s, m1);
    let hi = threshold_range_from(&s, m2);
    let missing = hi.uncovered_by(&lo);
    if missing > 0.0 {
        return Err(format!("seed {seed}: M={m2} covers {missing} outside M={m1}"));
    }
    Ok(())
}

/// MaxCount exceeds `M` exactly when ThresholdRange(`M`) is nonempty.
pub fn max_threshold_consistent(seed: u64) -> Check {
    let Instance { idx, bx, .. } = instance(seed);
    let s = interval_extrema(&idx, &bx, Extremum::Max, &SweepParams::default());
    let best = max_count_from(&s, &bx, idx.n());
    let (m, _) = two_thresholds(seed, idx.n() as f64);
    for m in [m, best.count, 0.5 * best.count, best.count - 1e-9] {
        let nonempty = !threshold_range_from(&s, m).is_empty();
        if (best.count > m) != nonempty {
            return Err(format!("seed {seed}: max {} vs M={m}, range nonempty={nonempty}", best.count));
        }
    }
    Ok(())
}

/// Inserting a point and removing it again restores every bucket.
pub fn insert_remove_identity(seed: u64) -> Check {
    let Instance { mut idx, .. } = instance(seed);
    let before: Vec<SkewAwareBucket> = idx.buckets().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let p = Hex6(std::array::from_fn(|_| rng.random_range(0.0..=20.0)));
    idx.insert(&p).map_err(|e| e.to_string())?;
    idx.remove(&p).map_err(|e| e.to_string())?;
    let mut after: Vec<SkewAwareBucket> = idx.buckets().cloned().collect();
    let mut before = before;
    before.sort_by_key(|b| b.id);
    after.sort_by_key(|b| b.id);
    if before != after {
        return Err(format!("seed {seed}: bucket state changed after insert/remove of {p:?}"));
    }
    Ok(())
}

/// The generator is a pure function of its configuration.
pub fn generator_deterministic(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig {
        n: rng.random_range(0..300),
        clusters: rng.random_range(1..50),
        spread: rng.random_range(0.0..1.0),
        seed,
        ..GenConfig::default()
    };
    let a = generate_clustered(&cfg).unwrap();
    let b = generate_clustered(&cfg).unwrap();
    let same = a.len() == b.len()
        && a.iter().zip(&b).all(|(p, q)| p.0.iter().zip(&q.0).all(|(x, y)| x.to_bits() == y.to_bits()));
    if !same {
        return Err(format!("seed {seed}: two runs differ"));
    }
    Ok(())
}

/// Named property checks, as run by the acceptance suite.
pub const PROPERTIES: [(&str, fn(u64) -> Check); 6] = [
    ("band nonnegativity", band_nonnegative),
    ("count continuity", count_continuous),
    ("threshold monotonicity", threshold_monotone),
    ("maxcount/threshold consistency", max_threshold_consistent),
    ("insert/remove identity", insert_remove_identity),
    ("generator determinism", generator_deterministic),
];
