//! The skew-aware 6-D bucket index.
//!
//! Points are hashed into fixed grid cells of the hex space. Each occupied
//! cell keeps one small histogram per axis, and a least-squares line fitted to
//! each histogram models how density trends across the cell. The product of
//! the six lines, scaled so that it integrates to the cell's share of all
//! points, is the density used by the estimated operators.
//!
//! No point list is stored; insert and remove touch a single bucket.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Hex6, ViewRect, HEX_AXES};

/// Default number of histogram subdivisions per axis.
pub const DEFAULT_SUBDIVISIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub lower: [f64; HEX_AXES],
    pub upper: [f64; HEX_AXES],
    pub divisions: [u32; HEX_AXES],
    /// Histogram subdivisions per axis within one cell.
    pub subdivisions: usize,
}

impl GridConfig {
    /// Same bounds and division count on every axis.
    pub fn uniform(lower: f64, upper: f64, divisions: u32) -> Self {
        GridConfig {
            lower: [lower; HEX_AXES],
            upper: [upper; HEX_AXES],
            divisions: [divisions; HEX_AXES],
            subdivisions: DEFAULT_SUBDIVISIONS,
        }
    }

    pub fn with_subdivisions(mut self, s: usize) -> Self {
        self.subdivisions = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.subdivisions < 2 {
            return Err(Error::InvalidConfig(format!(
                "histogram subdivisions must be at least 2, got {}",
                self.subdivisions
            )));
        }
        for a in 0..HEX_AXES {
            let (l, u) = (self.lower[a], self.upper[a]);
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidConfig(format!(
                    "axis {a}: bounds [{l}, {u}] must be finite with lower < upper"
                )));
            }
            if self.divisions[a] == 0 {
                return Err(Error::InvalidConfig(format!("axis {a}: divisions must be >= 1")));
            }
            if self.cell_width(a) <= 0.0 {
                return Err(Error::InvalidConfig(format!("axis {a}: zero cell width")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.divisions[axis] as f64
    }

    /// Zero-based grid cell holding `p`. Points on the upper face of the space
    /// fall into the last cell.
    pub fn cell_id(&self, p: &Hex6) -> Result<CellId> {
        let mut id = [0u32; HEX_AXES];
        for (a, slot) in id.iter_mut().enumerate() {
            let x = p.0[a];
            let (l, u) = (self.lower[a], self.upper[a]);
            if !(x >= l && x <= u) {
                return Err(Error::OutOfSpace {
                    axis: a,
                    value: x,
                    lower: l,
                    upper: u,
                });
            }
            let k = ((x - l) / self.cell_width(a)).floor() as u64;
            *slot = k.min(self.divisions[a] as u64 - 1) as u32;
        }
        Ok(CellId(id))
    }

    /// Lower and upper corner of a cell.
    pub fn cell_bounds(&self, id: &CellId) -> ([f64; HEX_AXES], [f64; HEX_AXES]) {
        let mut lo = [0.0; HEX_AXES];
        let mut hi = [0.0; HEX_AXES];
        for a in 0..HEX_AXES {
            let w = self.cell_width(a);
            lo[a] = self.lower[a] + id.0[a] as f64 * w;
            hi[a] = if id.0[a] + 1 == self.divisions[a] {
                self.upper[a]
            } else {
                self.lower[a] + (id.0[a] + 1) as f64 * w
            };
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId(pub [u32; HEX_AXES]);

/// Per-axis histogram of one bucket.
///
/// The least-squares accumulators are kept as exact integers: the number of
/// points and the division-index-weighted count. Sums in axis coordinates
/// follow from the subdivision left edges `lo + k·hw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisHistogram {
    pub counts: Vec<u32>,
    total: u64,
    index_sum: u64,
}

impl AxisHistogram {
    pub fn new(s: usize) -> Self {
        AxisHistogram {
            counts: vec![0; s],
            total: 0,
            index_sum: 0,
        }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        let total = counts.iter().map(|&c| c as u64).sum();
        let index_sum = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c as u64)
            .sum();
        AxisHistogram {
            counts,
            total,
            index_sum,
        }
    }

    pub fn subdivisions(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `Σ y_k`.
    pub fn sum_y(&self) -> f64 {
        self.total as f64
    }

    /// `Σ x_k·y_k` with `x_k = lo + k·hw`.
    pub fn sum_xy(&self, lo: f64, hw: f64) -> f64 {
        lo * self.total as f64 + hw * self.index_sum as f64
    }

    fn add(&mut self, k: usize) {
        self.counts[k] += 1;
        self.total += 1;
        self.index_sum += k as u64;
    }

    fn sub(&mut self, k: usize) {
        self.counts[k] -= 1;
        self.total -= 1;
        self.index_sum -= k as u64;
    }
}

/// `f(x) = slope·x + intercept + shift`, nonnegative over its axis extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendLine {
    pub slope: f64,
    pub intercept: f64,
    pub shift: f64,
}

impl TrendLine {
    pub const ONE: TrendLine = TrendLine {
        slope: 0.0,
        intercept: 1.0,
        shift: 0.0,
    };

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept + self.shift
    }

    /// Constant term with the shift folded in.
    #[inline]
    pub fn offset(&self) -> f64 {
        self.intercept + self.shift
    }

    /// `∫_lo^hi f(x) dx`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        0.5 * (self.eval(lo) + self.eval(hi)) * (hi - lo)
    }
}

/// Least-squares line through `(lo + k·hw, counts[k])`, `hw = (hi - lo)/s`,
/// shifted up just enough to be nonnegative on `[lo, hi]`.
pub fn fit_axis_trend(h: &AxisHistogram, lo: f64, hi: f64) -> TrendLine {
    let s = h.subdivisions() as f64;
    let hw = (hi - lo) / s;
    // Normal equations in division-index space, where the sums are exact.
    let sk = s * (s - 1.0) / 2.0;
    let skk = (s - 1.0) * s * (2.0 * s - 1.0) / 6.0;
    let denom = s * skk - sk * sk;
    let slope_k = (s * h.index_sum as f64 - sk * h.total as f64) / denom;
    let mean_y = h.total as f64 / s;
    let mean_x = lo + hw * (s - 1.0) / 2.0;
    let slope = slope_k / hw;
    let intercept = mean_y - slope * mean_x;
    let line = TrendLine {
        slope,
        intercept,
        shift: 0.0,
    };
    let low = line.eval(lo).min(line.eval(hi));
    TrendLine {
        shift: (-low).max(0.0),
        ..line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewAwareBucket {
    pub id: CellId,
    pub lower: [f64; HEX_AXES],
    pub upper: [f64; HEX_AXES],
    pub count: u64,
    pub hist: Vec<AxisHistogram>,
    pub trend: [TrendLine; HEX_AXES],
    /// `b / ∫ Π f_j`; the normalization constant is this divided by `n`.
    pub mass: f64,
    /// Set when the fitted trends had no mass and uniform density is used.
    pub degenerate: bool,
}

impl SkewAwareBucket {
    fn empty(cfg: &GridConfig, id: CellId) -> Self {
        let (lower, upper) = cfg.cell_bounds(&id);
        SkewAwareBucket {
            id,
            lower,
            upper,
            count: 0,
            hist: (0..HEX_AXES)
                .map(|_| AxisHistogram::new(cfg.subdivisions))
                .collect(),
            trend: [TrendLine::ONE; HEX_AXES],
            mass: 0.0,
            degenerate: false,
        }
    }

    /// Histogram division of coordinate `x` along `axis`.
    pub fn division(&self, axis: usize, x: f64) -> usize {
        let s = self.hist[axis].subdivisions();
        let hw = (self.upper[axis] - self.lower[axis]) / s as f64;
        let k = ((x - self.lower[axis]) / hw).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(s - 1)
        }
    }

    /// Refits all six trend lines and the normalization mass.
    pub fn refit(&mut self) {
        for a in 0..HEX_AXES {
            self.trend[a] = fit_axis_trend(&self.hist[a], self.lower[a], self.upper[a]);
        }
        let integral = self.trend_integral();
        if integral > 0.0 && integral.is_finite() {
            self.mass = self.count as f64 / integral;
            self.degenerate = false;
        } else {
            log::warn!(
                "bucket {:?}: trend product has no mass, falling back to uniform density",
                self.id
            );
            self.trend = [TrendLine::ONE; HEX_AXES];
            self.mass = self.count as f64 / self.trend_integral();
            self.degenerate = true;
        }
    }

    /// `∫_bucket Π_j f_j dφ`, the product of six one-dimensional integrals.
    pub fn trend_integral(&self) -> f64 {
        (0..HEX_AXES)
            .map(|a| self.trend[a].integral(self.lower[a], self.upper[a]))
            .product()
    }

    /// Normalization constant `c` with `F = c·Π f_j`, for an index of `n` points.
    pub fn c_norm(&self, n: u64) -> f64 {
        self.mass / n as f64
    }

    /// Fraction of all `n` points the density places in this bucket (`b/n`).
    pub fn point_fraction(&self, n: u64) -> f64 {
        self.c_norm(n) * self.trend_integral()
    }

    /// `∫_region F dφ` for an axis-aligned sub-box given by its corners.
    pub fn region_fraction(&self, lo: &[f64; HEX_AXES], hi: &[f64; HEX_AXES], n: u64) -> f64 {
        let mut acc = self.c_norm(n);
        for a in 0..HEX_AXES {
            let l = lo[a].max(self.lower[a]);
            let h = hi[a].min(self.upper[a]);
            if h <= l {
                return 0.0;
            }
            acc *= self.trend[a].integral(l, h);
        }
        acc
    }

    /// Velocity/position extent of the cell in view `dim`.
    pub fn view_rect(&self, dim: usize) -> ViewRect {
        ViewRect::new(
            self.lower[2 * dim],
            self.upper[2 * dim],
            self.lower[2 * dim + 1],
            self.upper[2 * dim + 1],
        )
    }

    fn add_point(&mut self, p: &Hex6) {
        for a in 0..HEX_AXES {
            let k = self.division(a, p.0[a]);
            self.hist[a].add(k);
        }
        self.count += 1;
    }

    fn try_remove_point(&mut self, p: &Hex6) -> Result<()> {
        let ks: Vec<usize> = (0..HEX_AXES).map(|a| self.division(a, p.0[a])).collect();
        for (a, &k) in ks.iter().enumerate() {
            if self.hist[a].counts[k] == 0 {
                return Err(Error::NotFound(format!(
                    "bucket {:?} has no point in division {k} of axis {a}",
                    self.id
                )));
            }
        }
        for (a, &k) in ks.iter().enumerate() {
            self.hist[a].sub(k);
        }
        self.count -= 1;
        Ok(())
    }

    /// Rebuilds a bucket from stored histogram counts.
    pub fn from_histograms(cfg: &GridConfig, id: CellId, hist: Vec<AxisHistogram>) -> Result<Self> {
        if hist.len() != HEX_AXES || hist.iter().any(|h| h.subdivisions() != cfg.subdivisions) {
            return Err(Error::Parse(format!("bucket {id:?}: histogram shape mismatch")));
        }
        let count = hist[0].total();
        if count == 0 || hist.iter().any(|h| h.total() != count) {
            return Err(Error::Parse(format!(
                "bucket {id:?}: histogram totals disagree or are zero"
            )));
        }
        for a in 0..HEX_AXES {
            if id.0[a] >= cfg.divisions[a] {
                return Err(Error::Parse(format!("bucket {id:?}: cell outside grid")));
            }
        }
        let mut b = SkewAwareBucket::empty(cfg, id);
        b.hist = hist;
        b.count = count;
        b.refit();
        Ok(b)
    }
}

/// Hash-table index of occupied buckets.
///
/// Buckets live in insertion order (removal swaps the last bucket into the
/// vacated slot), which keeps query results reproducible across save/load.
#[derive(Debug, Clone)]
pub struct MovingIndex {
    cfg: GridConfig,
    buckets: IndexMap<CellId, SkewAwareBucket>,
    n: u64,
}

impl MovingIndex {
    pub fn new(cfg: GridConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(MovingIndex {
            cfg,
            buckets: IndexMap::new(),
            n: 0,
        })
    }

    /// Inserts every point, refitting each touched bucket once at the end.
    pub fn from_points(cfg: GridConfig, points: &[Hex6]) -> Result<Self> {
        let mut idx = MovingIndex::new(cfg)?;
        let mut touched = Vec::new();
        for p in points {
            let id = idx.cfg.cell_id(p)?;
            let cfg = &idx.cfg;
            let entry = idx.buckets.entry(id);
            let bucket = entry.or_insert_with(|| {
                touched.push(id);
                SkewAwareBucket::empty(cfg, id)
            });
            bucket.add_point(p);
            idx.n += 1;
        }
        for b in idx.buckets.values_mut() {
            b.refit();
        }
        Ok(idx)
    }

    pub(crate) fn from_parts(cfg: GridConfig, buckets: Vec<SkewAwareBucket>) -> Result<Self> {
        cfg.validate()?;
        let mut map = IndexMap::with_capacity(buckets.len());
        let mut n = 0;
        for b in buckets {
            n += b.count;
            if map.insert(b.id, b).is_some() {
                return Err(Error::Parse("duplicate bucket id".into()));
            }
        }
        Ok(MovingIndex {
            cfg,
            buckets: map,
            n,
        })
    }

    pub fn config(&self) -> &GridConfig {
        &self.cfg
    }

    /// Total number of indexed points.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn buckets(&self) -> impl ExactSizeIterator<Item = &SkewAwareBucket> {
        self.buckets.values()
    }

    pub fn bucket(&self, id: &CellId) -> Option<&SkewAwareBucket> {
        self.buckets.get(id)
    }

    pub fn insert(&mut self, p: &Hex6) -> Result<()> {
        let id = self.cfg.cell_id(p)?;
        let cfg = &self.cfg;
        let bucket = self
            .buckets
            .entry(id)
            .or_insert_with(|| SkewAwareBucket::empty(cfg, id));
        bucket.add_point(p);
        bucket.refit();
        self.n += 1;
        Ok(())
    }

    pub fn remove(&mut self, p: &Hex6) -> Result<()> {
        let id = self
            .cfg
            .cell_id(p)
            .map_err(|e| Error::NotFound(format!("point outside index space: {e}")))?;
        let Some(bucket) = self.buckets.get_mut(&id) else {
            return Err(Error::NotFound(format!("no bucket {id:?}")));
        };
        bucket.try_remove_point(p)?;
        if bucket.count == 0 {
            self.buckets.swap_remove(&id);
        } else {
            bucket.refit();
        }
        self.n -= 1;
        Ok(())
    }
}
