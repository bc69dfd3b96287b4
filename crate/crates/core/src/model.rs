//! Hex representation of linearly moving points, query boxes, and the
//! per-view geometry shared by the exact and estimated operators.
//!
//! A point moving as `x(t) = vx·t + x0` (and likewise for `y`, `z`) is stored
//! as the static 6-tuple `(vx, x0, vy, y0, vz, z0)`. Axis `2k` is the velocity
//! and axis `2k + 1` the position of spatial dimension `k`; the pair is the
//! point's dual in the `k`-th view.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible query start time.
pub const EPS_TIME: f64 = 1e-6;

/// Number of spatial dimensions.
pub const DIMS: usize = 3;

/// Number of hex axes (velocity/position per spatial dimension).
pub const HEX_AXES: usize = 2 * DIMS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hex6(pub [f64; HEX_AXES]);

impl Hex6 {
    pub fn new(vx: f64, x0: f64, vy: f64, y0: f64, vz: f64, z0: f64) -> Self {
        Hex6([vx, x0, vy, y0, vz, z0])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    #[inline]
    pub fn velocity(&self, dim: usize) -> f64 {
        self.0[2 * dim]
    }

    #[inline]
    pub fn intercept(&self, dim: usize) -> f64 {
        self.0[2 * dim + 1]
    }

    /// Projection into the `dim`-th view.
    #[inline]
    pub fn view(&self, dim: usize) -> ViewPoint {
        ViewPoint {
            v: self.velocity(dim),
            p: self.intercept(dim),
        }
    }

    /// Position along spatial dimension `dim` at time `s`.
    #[inline]
    pub fn coord_at(&self, dim: usize, s: f64) -> f64 {
        self.velocity(dim) * s + self.intercept(dim)
    }

    pub fn position_at(&self, s: f64) -> [f64; DIMS] {
        [self.coord_at(0, s), self.coord_at(1, s), self.coord_at(2, s)]
    }

    /// True iff `self` strictly dominates `p` at time `s` on every spatial axis.
    pub fn dominates(&self, p: &Hex6, s: f64) -> bool {
        (0..DIMS).all(|d| p.coord_at(d, s) < self.coord_at(d, s))
    }
}

impl From<[f64; HEX_AXES]> for Hex6 {
    fn from(a: [f64; HEX_AXES]) -> Self {
        Hex6(a)
    }
}

/// Half-open time interval `[l, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeInterval {
    pub l: f64,
    pub u: f64,
}

impl TimeInterval {
    pub fn new(l: f64, u: f64) -> Self {
        TimeInterval { l, u }
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.u - self.l
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.u <= self.l
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.l + self.u)
    }

    #[inline]
    pub fn contains(&self, s: f64) -> bool {
        s >= self.l && s < self.u
    }
}

/// One query corner (or one point) projected into a single view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewPoint {
    pub v: f64,
    pub p: f64,
}

impl ViewPoint {
    pub fn new(v: f64, p: f64) -> Self {
        ViewPoint { v, p }
    }

    /// Height at velocity `v` of the slope `-t` line through this point.
    #[inline]
    pub fn line_at(&self, t: f64, v: f64) -> f64 {
        self.p - t * (v - self.v)
    }
}

/// Axis-aligned rectangle in one view: velocity extent times position extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewRect {
    pub v_lo: f64,
    pub v_hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
}

impl ViewRect {
    pub fn new(v_lo: f64, v_hi: f64, p_lo: f64, p_hi: f64) -> Self {
        ViewRect {
            v_lo,
            v_hi,
            p_lo,
            p_hi,
        }
    }

    pub fn corners(&self) -> [ViewPoint; 4] {
        [
            ViewPoint::new(self.v_lo, self.p_lo),
            ViewPoint::new(self.v_hi, self.p_lo),
            ViewPoint::new(self.v_lo, self.p_hi),
            ViewPoint::new(self.v_hi, self.p_hi),
        ]
    }

    pub fn area(&self) -> f64 {
        (self.v_hi - self.v_lo) * (self.p_hi - self.p_lo)
    }
}

/// A moving axis-aligned box between two moving corners, over a time interval.
///
/// After [`normalize_query`], `lo` is strictly below `hi` on every spatial
/// axis for every instant of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryBox {
    pub lo: Hex6,
    pub hi: Hex6,
    pub t: TimeInterval,
}

impl QueryBox {
    /// Strict containment of `p` at time `s`.
    pub fn contains_at(&self, p: &Hex6, s: f64) -> bool {
        self.hi.dominates(p, s) && p.dominates(&self.lo, s)
    }

    /// Corner midpoint, used to model the distribution of crossing times.
    pub fn midpoint(&self) -> Hex6 {
        let mut m = [0.0; HEX_AXES];
        for (a, m) in m.iter_mut().enumerate() {
            *m = 0.5 * (self.lo.0[a] + self.hi.0[a]);
        }
        Hex6(m)
    }
}

/// Builds a [`QueryBox`] from two corners given in any order.
///
/// Each spatial axis is oriented independently so that the lower corner is
/// strictly below the upper one throughout `t`.
pub fn normalize_query(a: Hex6, b: Hex6, t: TimeInterval) -> Result<QueryBox> {
    if !(t.l.is_finite() && t.u.is_finite()) || t.l >= t.u {
        return Err(Error::InvalidConfig(format!(
            "query interval [{}, {}] must be finite with begin < end",
            t.l, t.u
        )));
    }
    if t.l < EPS_TIME {
        return Err(Error::InvalidConfig(format!(
            "query interval must start at or after {EPS_TIME}, got {}",
            t.l
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::DegenerateBox("non-finite corner".into()));
    }
    let mut lo = a;
    let mut hi = b;
    for d in 0..DIMS {
        let gap_l = b.coord_at(d, t.l) - a.coord_at(d, t.l);
        let gap_u = b.coord_at(d, t.u) - a.coord_at(d, t.u);
        let (l, h) = if gap_l > 0.0 && gap_u > 0.0 {
            (a, b)
        } else if gap_l < 0.0 && gap_u < 0.0 {
            (b, a)
        } else {
            return Err(Error::DegenerateBox(format!(
                "corners cross or touch on spatial axis {d} within [{}, {}]",
                t.l, t.u
            )));
        };
        lo.0[2 * d] = l.0[2 * d];
        lo.0[2 * d + 1] = l.0[2 * d + 1];
        hi.0[2 * d] = h.0[2 * d];
        hi.0[2 * d + 1] = h.0[2 * d + 1];
    }
    Ok(QueryBox { lo, hi, t })
}

/// Solves `slope·s + offset > 0` for `s`, returned as an open interval.
fn positive_span(slope: f64, offset: f64) -> (f64, f64) {
    if slope > 0.0 {
        (-offset / slope, f64::INFINITY)
    } else if slope < 0.0 {
        (f64::NEG_INFINITY, -offset / slope)
    } else if offset > 0.0 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        (f64::INFINITY, f64::NEG_INFINITY)
    }
}

/// The part of `bx.t` during which `p` lies strictly inside the box.
///
/// Containment on each axis is a pair of linear inequalities, so the result
/// is a single interval (or nothing).
pub fn containment_interval(p: &Hex6, bx: &QueryBox) -> Option<TimeInterval> {
    let mut l = bx.t.l;
    let mut u = bx.t.u;
    for d in 0..DIMS {
        let above = positive_span(
            p.velocity(d) - bx.lo.velocity(d),
            p.intercept(d) - bx.lo.intercept(d),
        );
        let below = positive_span(
            bx.hi.velocity(d) - p.velocity(d),
            bx.hi.intercept(d) - p.intercept(d),
        );
        l = l.max(above.0).max(below.0);
        u = u.min(above.1).min(below.1);
        if l >= u {
            return None;
        }
    }
    Some(TimeInterval { l, u })
}

/// Times in the open interval `(t.l, t.u)` at which the slope `-s` line through
/// `q` passes a corner of `rect`, sorted and deduplicated within [`EPS_TIME`].
pub fn vertex_cross_times(q: ViewPoint, rect: &ViewRect, t: TimeInterval) -> Vec<f64> {
    let mut out: Vec<f64> = rect
        .corners()
        .iter()
        .filter(|c| c.v != q.v)
        .map(|c| (q.p - c.p) / (c.v - q.v))
        .filter(|&s| s > t.l && s < t.u)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|b, a| (*b - *a).abs() <= EPS_TIME);
    out
}
