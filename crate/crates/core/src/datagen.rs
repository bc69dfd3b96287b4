//! Clustered moving-point data and query corpora.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Hex6, TimeInterval, HEX_AXES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub clusters: usize,
    pub lower: f64,
    pub upper: f64,
    /// Point `i` lies within `spread * i / n` half-widths of its center.
    pub spread: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n: 10_000,
            clusters: 10,
            lower: 0.0,
            upper: 100.0,
            spread: 0.5,
            seed: 1,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::InvalidConfig("clusters must be at least 1".into()));
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::InvalidConfig(format!(
                "bounds [{}, {}] must be finite and increasing",
                self.lower, self.upper
            )));
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return Err(Error::InvalidConfig(format!("spread {} must be nonnegative", self.spread)));
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// Cluster centers drawn for `cfg`; the same draws `generate_clustered` uses.
pub fn cluster_centers(cfg: &GenConfig) -> Vec<Hex6> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    draw_centers(cfg, &mut rng)
}

fn draw_centers(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Vec<Hex6> {
    (0..cfg.clusters)
        .map(|_| Hex6(std::array::from_fn(|_| rng.random_range(cfg.lower..cfg.upper))))
        .collect()
}

pub fn generate_clustered(cfg: &GenConfig) -> Result<Vec<Hex6>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centers = draw_centers(cfg, &mut rng);
    let w = cfg.half_width();
    let mut out = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let c = centers.choose(&mut rng).expect("at least one cluster");
        let dir = unit_direction(&mut rng);
        let max_r = cfg.spread * i as f64 / cfg.n as f64 * w;
        let r = if max_r > 0.0 { rng.random_range(0.0..=max_r) } else { 0.0 };
        out.push(Hex6(std::array::from_fn(|a| {
            (c.0[a] + r * dir[a]).clamp(cfg.lower, cfg.upper)
        })));
    }
    Ok(out)
}

fn unit_direction(rng: &mut ChaCha8Rng) -> [f64; HEX_AXES] {
    loop {
        let g: [f64; HEX_AXES] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.map(|x| x / norm);
        }
    }
}

/// The ten-point worked example: one bucket of `[5, 10)^6` whose velocity
/// histograms are `(1,1,2,2,4)` and position histograms `(2,2,2,2,2)` on
/// every axis.
pub fn worked_example_points() -> Vec<Hex6> {
    const V: [f64; 10] = [5.345, 6.2, 7.1, 7.6, 8.3, 8.7, 9.1, 9.2, 9.3, 9.468];
    const X: [f64; 10] = [7.543, 5.2, 5.7, 6.3, 6.8, 7.1, 8.2, 8.9, 9.4, 9.9];
    const Y: [f64; 10] = [8.158, 5.1, 5.9, 6.1, 6.9, 7.3, 7.7, 8.6, 9.2, 9.7];
    const Z: [f64; 10] = [5.488, 5.6, 6.4, 6.6, 7.2, 7.8, 8.3, 8.7, 9.1, 9.6];
    (0..10).map(|i| Hex6([V[i], X[i], V[i], Y[i], V[i], Z[i]])).collect()
}

/// Corners and interval of the worked-example query.
pub fn worked_example_query() -> (Hex6, Hex6, TimeInterval) {
    (
        Hex6([9.5, 8.0, 9.5, 8.0, 9.5, 8.0]),
        Hex6([8.5, 5.0, 8.5, 5.0, 8.5, 5.0]),
        TimeInterval::new(0.1, 10.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Narrow,
    Wide,
    Edge,
    Outside,
}

impl QueryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Narrow => "narrow",
            QueryKind::Wide => "wide",
            QueryKind::Edge => "edge",
            QueryKind::Outside => "outside",
        }
    }
}

/// Relative weights of each query kind in a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMix {
    pub narrow: u32,
    pub wide: u32,
    pub edge: u32,
    pub outside: u32,
}

impl Default for QueryMix {
    fn default() -> Self {
        QueryMix {
            narrow: 3,
            wide: 5,
            edge: 1,
            outside: 1,
        }
    }
}

impl QueryMix {
    pub fn wide_only() -> Self {
        QueryMix {
            narrow: 0,
            wide: 1,
            edge: 0,
            outside: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub count: usize,
    pub mix: QueryMix,
    /// Query intervals are drawn inside this range.
    pub t_range: TimeInterval,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            count: 100,
            mix: QueryMix::default(),
            t_range: TimeInterval::new(0.1, 10.0),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusQuery {
    pub a: Hex6,
    pub b: Hex6,
    pub t: TimeInterval,
    pub kind: QueryKind,
}

/// Draws queries as a center plus half-widths per axis, so the corners never
/// cross. Narrow and wide queries are centered on data points; edge queries
/// on the space boundary; outside queries beyond it.
pub fn generate_queries(points: &[Hex6], space: (f64, f64), cfg: &CorpusConfig) -> Vec<CorpusQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = &cfg.mix;
    let kinds = [
        (QueryKind::Narrow, m.narrow),
        (QueryKind::Wide, m.wide),
        (QueryKind::Edge, m.edge),
        (QueryKind::Outside, m.outside),
    ];
    let total: u32 = kinds.iter().map(|k| k.1).sum();
    let (lo, hi) = space;
    let span = hi - lo;
    let mut out = Vec::with_capacity(cfg.count);
    if total == 0 {
        return out;
    }
    for _ in 0..cfg.count {
        let mut pick = rng.random_range(0..total);
        let kind = kinds
            .iter()
            .find(|k| {
                if pick < k.1 {
                    true
                } else {
                    pick -= k.1;
                    false
                }
            })
            .expect("weights sum to total")
            .0;
        let anchor = |rng: &mut ChaCha8Rng| -> Hex6 {
            match points.choose(rng) {
                Some(p) => *p,
                None => Hex6(std::array::from_fn(|_| rng.random_range(lo..hi))),
            }
        };
        let (center, half): (Hex6, [f64; HEX_AXES]) = match kind {
            QueryKind::Narrow => (anchor(&mut rng), std::array::from_fn(|_| rng.random_range(0.02..0.06) * span)),
            QueryKind::Wide => (anchor(&mut rng), std::array::from_fn(|_| rng.random_range(0.1..0.25) * span)),
            QueryKind::Edge => {
                let mut c = anchor(&mut rng);
                let axis = rng.random_range(0..HEX_AXES);
                c.0[axis] = if rng.random_bool(0.5) { lo } else { hi };
                (c, std::array::from_fn(|_| rng.random_range(0.05..0.15) * span))
            }
            QueryKind::Outside => {
                let c = Hex6(std::array::from_fn(|a| {
                    if a % 2 == 1 {
                        hi + rng.random_range(0.5..1.5) * span
                    } else {
                        rng.random_range(lo..hi)
                    }
                }));
                (c, std::array::from_fn(|_| rng.random_range(0.02..0.1) * span))
            }
        };
        let a = Hex6(std::array::from_fn(|i| center.0[i] - half[i]));
        let b = Hex6(std::array::from_fn(|i| center.0[i] + half[i]));
        let r = cfg.t_range;
        let l = rng.random_range(r.l..r.l + 0.5 * r.len());
        let u = (l + rng.random_range(0.05..0.5) * r.len()).min(r.u);
        out.push(CorpusQuery {
            a,
            b,
            t: TimeInterval::new(l, u),
            kind,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::normalize_query;

    #[test]
    fn empty_and_deterministic() {
        let cfg = GenConfig {
            n: 0,
            ..GenConfig::default()
        };
        assert!(generate_clustered(&cfg).unwrap().is_empty());
        let cfg = GenConfig {
            n: 500,
            ..GenConfig::default()
        };
        assert_eq!(generate_clustered(&cfg).unwrap(), generate_clustered(&cfg).unwrap());
    }

    #[test]
    fn early_points_hug_centers() {
        let cfg = GenConfig {
            n: 10_000,
            clusters: 10,
            spread: 0.5,
            ..GenConfig::default()
        };
        let pts = generate_clustered(&cfg).unwrap();
        let centers = cluster_centers(&cfg);
        let w = cfg.half_width();
        assert!(pts.iter().all(|p| p.0.iter().all(|&x| (0.0..=100.0).contains(&x))));
        let close = pts[..1000]
            .iter()
            .filter(|p| {
                centers.iter().any(|c| {
                    let d2: f64 = (0..HEX_AXES).map(|a| (p.0[a] - c.0[a]).powi(2)).sum();
                    d2.sqrt() <= 0.05 * w + 1e-9
                })
            })
            .count();
        assert!(close >= 990, "{close}");
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = GenConfig {
            clusters: 0,
            ..GenConfig::default()
        };
        assert!(matches!(generate_clustered(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn corpus_queries_normalize() {
        let pts = generate_clustered(&GenConfig {
            n: 200,
            ..GenConfig::default()
        })
        .unwrap();
        let qs = generate_queries(&pts, (0.0, 100.0), &CorpusConfig::default());
        assert_eq!(qs.len(), 100);
        for q in &qs {
            assert!(normalize_query(q.a, q.b, q.t).is_ok());
            assert!(q.t.l >= 0.1 && q.t.u <= 10.0);
        }
    }
}
