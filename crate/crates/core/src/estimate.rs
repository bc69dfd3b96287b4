//! Estimated aggregation operators over a [`MovingIndex`].

use serde::{Deserialize, Serialize};

use crate::cases::view_above_at;
use crate::index::{MovingIndex, SkewAwareBucket};
use crate::intervals::IntervalSet;
use crate::maximize::{Extremum, SweepParams};
use crate::model::{QueryBox, DIMS};
use crate::sweep::{interval_extrema, SweepSummary};

const FRACTION_TOL: f64 = 1e-9;

/// Time and value of an extreme count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxCountResult {
    pub t_max: f64,
    /// Raw expected count (or exact integer count, for the exact operators).
    pub count: f64,
    pub count_rounded: u64,
}

impl MaxCountResult {
    pub fn new(t_max: f64, count: f64) -> Self {
        MaxCountResult {
            t_max,
            count,
            count_rounded: count.max(0.0).round() as u64,
        }
    }
}

/// Best interval extreme, with ties going to the earliest time.
pub fn max_count_from(summary: &SweepSummary, bx: &QueryBox, n: u64) -> MaxCountResult {
    let mut best: Option<(f64, f64)> = None;
    for e in &summary.intervals {
        match best {
            Some((_, v)) if !summary.mode.better(e.count, v) => {}
            _ => best = Some((e.t, e.count)),
        }
    }
    let (t, c) = best.unwrap_or((bx.t.l, 0.0));
    MaxCountResult::new(t, c.clamp(0.0, n as f64))
}

/// Estimated MaxCount or MinCount.
pub fn max_count(idx: &MovingIndex, bx: &QueryBox, mode: Extremum) -> MaxCountResult {
    max_count_with(idx, bx, mode, &SweepParams::default())
}

pub fn max_count_with(idx: &MovingIndex, bx: &QueryBox, mode: Extremum, params: &SweepParams) -> MaxCountResult {
    if idx.is_empty() {
        return MaxCountResult::new(bx.t.l, 0.0);
    }
    max_count_from(&interval_extrema(idx, bx, mode, params), bx, idx.n())
}

/// Whole index time intervals whose maximum expected count exceeds `m`.
pub fn threshold_range_from(summary: &SweepSummary, m: f64) -> IntervalSet {
    debug_assert_eq!(summary.mode, Extremum::Max);
    let mut set = IntervalSet::new();
    for e in summary.intervals.iter().filter(|e| e.count > m) {
        set.push(e.interval);
    }
    set
}

/// Estimated ThresholdRange.
pub fn threshold_range(idx: &MovingIndex, bx: &QueryBox, m: f64) -> IntervalSet {
    threshold_range_with(idx, bx, m, &SweepParams::default())
}

pub fn threshold_range_with(idx: &MovingIndex, bx: &QueryBox, m: f64, params: &SweepParams) -> IntervalSet {
    if idx.is_empty() {
        return IntervalSet::new();
    }
    threshold_range_from(&interval_extrema(idx, bx, Extremum::Max, params), m)
}

/// Contribution of one bucket to the estimated CountRange.
pub fn bucket_count_range(bucket: &SkewAwareBucket, bx: &QueryBox, n: u64) -> f64 {
    let (tl, tu) = (bx.t.l, bx.t.u);
    let mut early_lo = 1.0;
    let mut late_lo = 1.0;
    for dim in 0..DIMS {
        let rect = bucket.view_rect(dim);
        let (g, h) = (&bucket.trend[2 * dim], &bucket.trend[2 * dim + 1]);
        let (lo, hi) = (bx.lo.view(dim), bx.hi.view(dim));
        let lo_l = view_above_at(&rect, g, h, lo, tl);
        let lo_u = view_above_at(&rect, g, h, lo, tu);
        let hi_l = view_above_at(&rect, g, h, hi, tl);
        let hi_u = view_above_at(&rect, g, h, hi, tu);
        early_lo *= (lo_l - hi_u).max(0.0);
        late_lo *= (lo_u - hi_l).max(0.0);
    }
    let c = bucket.c_norm(n);
    let back = c * early_lo;
    let fwd = c * late_lo;
    let share = bucket.point_fraction(n);
    let b = bucket.count as f64;
    if (back - share).abs() <= FRACTION_TOL || (fwd - share).abs() <= FRACTION_TOL {
        b
    } else if back <= FRACTION_TOL && fwd <= FRACTION_TOL {
        0.0
    } else {
        (n as f64 * back.max(fwd)).min(b)
    }
}

/// Estimated CountRange.
pub fn count_range(idx: &MovingIndex, bx: &QueryBox) -> f64 {
    let n = idx.n();
    let total: f64 = idx.buckets().map(|b| bucket_count_range(b, bx, n)).sum();
    total.clamp(0.0, n as f64)
}
