//! Closed-form integration of one bucket view over the region above a
//! sweeping line.
//!
//! In a view, the dual of a query corner `q` and a time `t` define the line
//! `p = q.p - t·(v - q.v)`. Points above that line are exactly the points
//! ahead of the corner on that spatial axis at time `t`. For a bucket whose
//! density in the view is `g(v)·h(p)` (two linear trend factors), the mass
//! above the line is a Laurent polynomial in `t` whose shape depends only on
//! which rectangle edges the line crosses.
//!
//! Writing `u = v - q.v`, the line meets the top and bottom edges at
//! `u = (q.p - p_hi)/t` and `u = (q.p - p_lo)/t`. Every case splits the
//! velocity extent into pieces that are either fully above the line or cut by
//! it, with piece endpoints that are either fixed or of the form `k/t`.
//! Substituting those endpoints into the antiderivatives yields the terms.

use serde::{Deserialize, Serialize};

use crate::index::{SkewAwareBucket, TrendLine};
use crate::model::{QueryBox, TimeInterval, ViewPoint, ViewRect, DIMS};
use crate::poly::{GeneralFormPoly, ViewPoly};

/// Which rectangle edges the sweep line crosses.
///
/// Letters follow the usual numbering of the sweep cases. `A`, `D` and `E`
/// only arise for rising lines (negative time) and are kept for completeness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// Left and top edges (rising line).
    A,
    /// Top and right edges.
    B,
    /// Left and bottom edges.
    C,
    /// Bottom and right edges (rising line).
    D,
    /// Bottom and top edges (rising line).
    E,
    /// Top and bottom edges.
    F,
    /// Left and right edges.
    G,
    /// Line below every corner: the whole rectangle is above it.
    H,
    /// Line above every corner: nothing is above it.
    Empty,
}

/// Picks the case for the line through `q` at time `t`.
pub fn classify_case(q: ViewPoint, rect: &ViewRect, t: f64) -> CaseTag {
    let yl = q.line_at(t, rect.v_lo);
    let yr = q.line_at(t, rect.v_hi);
    if yl.max(yr) <= rect.p_lo {
        return CaseTag::H;
    }
    if yl.min(yr) >= rect.p_hi {
        return CaseTag::Empty;
    }
    if yl >= yr {
        match (yl <= rect.p_hi, yr >= rect.p_lo) {
            (true, true) => CaseTag::G,
            (true, false) => CaseTag::C,
            (false, true) => CaseTag::B,
            (false, false) => CaseTag::F,
        }
    } else {
        match (yl >= rect.p_lo, yr <= rect.p_hi) {
            (true, true) => CaseTag::G,
            (true, false) => CaseTag::A,
            (false, true) => CaseTag::D,
            (false, false) => CaseTag::E,
        }
    }
}

/// Piece endpoint in the shifted velocity coordinate `u = v - q.v`.
#[derive(Clone, Copy)]
enum End {
    Fixed(f64),
    /// `u = k / t`.
    Moving(f64),
}

/// Accumulates `sign·coef·t^j·u^e` evaluated at an endpoint.
#[inline]
fn put(poly: &mut ViewPoly, sign: f64, coef: f64, j: i32, e: i32, end: End) {
    if coef == 0.0 {
        return;
    }
    match end {
        End::Fixed(u) => poly.add_term(j, sign * coef * u.powi(e)),
        End::Moving(k) => poly.add_term(j - e, sign * coef * k.powi(e)),
    }
}

struct ViewIntegrand {
    /// Velocity factor in `u`: `alpha·u + g0`.
    alpha: f64,
    g0: f64,
    /// Cut-column integrand `K0 + K1·t·u + K2·t²·u²` (mass between line and top).
    k0: f64,
    k1: f64,
    k2: f64,
    /// Mass of a full column, `∫_{p_lo}^{p_hi} h`.
    col: f64,
}

impl ViewIntegrand {
    fn new(q: ViewPoint, rect: &ViewRect, g: &TrendLine, h: &TrendLine) -> Self {
        let (gamma, delta) = (h.slope, h.offset());
        let big_h = |p: f64| 0.5 * gamma * p * p + delta * p;
        ViewIntegrand {
            alpha: g.slope,
            g0: g.slope * q.v + g.offset(),
            k0: big_h(rect.p_hi) - big_h(q.p),
            k1: gamma * q.p + delta,
            k2: -0.5 * gamma,
            col: big_h(rect.p_hi) - big_h(rect.p_lo),
        }
    }

    /// Adds `∫_from^to g(u)·(H(p_hi) - H(line(u))) du`.
    fn cut(&self, poly: &mut ViewPoly, from: End, to: End) {
        // (alpha·u + g0)(K0 + K1 t u + K2 t² u²), term by term as (coef, t-power, u-power).
        let terms = [
            (self.g0 * self.k0, 0, 0),
            (self.alpha * self.k0, 0, 1),
            (self.g0 * self.k1, 1, 1),
            (self.alpha * self.k1, 1, 2),
            (self.g0 * self.k2, 2, 2),
            (self.alpha * self.k2, 2, 3),
        ];
        for (c, j, m) in terms {
            let c = c / (m + 1) as f64;
            put(poly, 1.0, c, j, m + 1, to);
            put(poly, -1.0, c, j, m + 1, from);
        }
    }

    /// Adds `∫_from^to g(u)·col du`.
    fn full(&self, poly: &mut ViewPoly, from: End, to: End) {
        let c2 = 0.5 * self.alpha * self.col;
        let c1 = self.g0 * self.col;
        for (c, e) in [(c2, 2), (c1, 1)] {
            put(poly, 1.0, c, 0, e, to);
            put(poly, -1.0, c, 0, e, from);
        }
    }
}

/// Mass of `g(v)·h(p)` over the part of `rect` above the line through `q`,
/// as a function of time, valid while the line stays in case `tag`.
///
/// `g` is the velocity-axis trend and `h` the position-axis trend.
pub fn view_above_poly(
    rect: &ViewRect,
    g: &TrendLine,
    h: &TrendLine,
    q: ViewPoint,
    tag: CaseTag,
) -> ViewPoly {
    let w = ViewIntegrand::new(q, rect, g, h);
    let ul = End::Fixed(rect.v_lo - q.v);
    let ur = End::Fixed(rect.v_hi - q.v);
    let top = End::Moving(q.p - rect.p_hi);
    let bottom = End::Moving(q.p - rect.p_lo);
    let mut out = ViewPoly::ZERO;
    match tag {
        CaseTag::Empty => {}
        CaseTag::H => w.full(&mut out, ul, ur),
        CaseTag::G => w.cut(&mut out, ul, ur),
        CaseTag::C => {
            w.cut(&mut out, ul, bottom);
            w.full(&mut out, bottom, ur);
        }
        CaseTag::B => w.cut(&mut out, top, ur),
        CaseTag::F => {
            w.cut(&mut out, top, bottom);
            w.full(&mut out, bottom, ur);
        }
        CaseTag::A => w.cut(&mut out, ul, top),
        CaseTag::D => {
            w.full(&mut out, ul, bottom);
            w.cut(&mut out, bottom, ur);
        }
        CaseTag::E => {
            w.full(&mut out, ul, bottom);
            w.cut(&mut out, bottom, top);
        }
    }
    out
}

/// Mass above the line through `q` at time `t` (classifies, then evaluates).
pub fn view_above_at(rect: &ViewRect, g: &TrendLine, h: &TrendLine, q: ViewPoint, t: f64) -> f64 {
    let tag = classify_case(q, rect, t);
    match tag {
        CaseTag::Empty => 0.0,
        _ => view_above_poly(rect, g, h, q, tag).eval(t),
    }
}

/// Un-normalized band mass in view `dim`: above the lower corner minus above
/// the upper corner, with both cases read at `t_mid`.
pub fn view_band_poly(bucket: &SkewAwareBucket, bx: &QueryBox, dim: usize, t_mid: f64) -> ViewPoly {
    let rect = bucket.view_rect(dim);
    let g = &bucket.trend[2 * dim];
    let h = &bucket.trend[2 * dim + 1];
    let lo = bx.lo.view(dim);
    let hi = bx.hi.view(dim);
    let lo_tag = classify_case(lo, &rect, t_mid);
    let hi_tag = classify_case(hi, &rect, t_mid);
    // The upper line is never below the lower one, so either condition
    // leaves an empty band.
    if lo_tag == CaseTag::Empty || hi_tag == CaseTag::H {
        return ViewPoly::ZERO;
    }
    view_above_poly(&rect, g, h, lo, lo_tag) - view_above_poly(&rect, g, h, hi, hi_tag)
}

/// Expected fraction of all `n` points that lie in the box, contributed by
/// one bucket over `interval` (which must not contain a case change).
pub fn delta_p_poly(
    bucket: &SkewAwareBucket,
    bx: &QueryBox,
    interval: TimeInterval,
    n: u64,
) -> GeneralFormPoly {
    delta_p_poly_at(bucket, bx, interval.mid(), n)
}

pub(crate) fn delta_p_poly_at(
    bucket: &SkewAwareBucket,
    bx: &QueryBox,
    t_mid: f64,
    n: u64,
) -> GeneralFormPoly {
    let mut bands = [ViewPoly::ZERO; DIMS];
    for (dim, band) in bands.iter_mut().enumerate() {
        *band = view_band_poly(bucket, bx, dim, t_mid);
        if band.is_zero() {
            return GeneralFormPoly::ZERO;
        }
    }
    GeneralFormPoly::product3(&bands[0], &bands[1], &bands[2]) * bucket.c_norm(n)
}
