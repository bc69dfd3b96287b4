//! Time partition and incremental sweep over an index.
//!
//! Each bucket changes its polynomial only when a corner line passes one of
//! its rectangle vertices in some view. Between those instants the global
//! expected count is a single general-form polynomial, maintained by
//! swapping out one bucket's contribution at a time.

use serde::{Deserialize, Serialize};

use crate::cases::delta_p_poly_at;
use crate::index::{CellId, MovingIndex, SkewAwareBucket};
use crate::maximize::{extremize_on_interval, Extremum, SweepParams};
use crate::model::{vertex_cross_times, QueryBox, TimeInterval, ViewPoint, ViewRect, DIMS};
use crate::poly::{GeneralFormPoly, PolyAccumulator};
use crate::sort::{EventSorter, SortStats};

/// Ordered boundaries of the index time intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimePartition {
    /// `t.l`, the interior boundaries, then `t.u`.
    pub times: Vec<f64>,
    /// For each entry of `times`, the buckets whose case changes there.
    /// Empty at both ends.
    pub changes: Vec<Vec<CellId>>,
}

impl TimePartition {
    pub fn intervals(&self) -> impl Iterator<Item = TimeInterval> + '_ {
        self.times.windows(2).map(|w| TimeInterval::new(w[0], w[1]))
    }
}

/// True when the band is empty in some view for the whole query interval.
///
/// Corner positions relative to a line are linear in `t`, so checking both
/// endpoints of the query interval is enough.
fn never_in_band(bucket: &SkewAwareBucket, bx: &QueryBox) -> bool {
    (0..DIMS).any(|dim| {
        let rect = bucket.view_rect(dim);
        let (lo, hi) = (bx.lo.view(dim), bx.hi.view(dim));
        let corners = rect.corners();
        [bx.t.l, bx.t.u].iter().all(|&t| {
            corners.iter().all(|c| c.p >= hi.line_at(t, c.v))
        }) || [bx.t.l, bx.t.u].iter().all(|&t| {
            corners.iter().all(|c| c.p <= lo.line_at(t, c.v))
        })
    })
}

fn own_events(bucket: &SkewAwareBucket, bx: &QueryBox, eps: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for dim in 0..DIMS {
        let rect = bucket.view_rect(dim);
        for q in [bx.lo.view(dim), bx.hi.view(dim)] {
            out.extend(vertex_cross_times(q, &rect, bx.t));
        }
    }
    out.retain(|&s| s > bx.t.l + eps && s < bx.t.u - eps);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|b, a| *b - *a <= eps);
    out
}

/// Sort model views: the whole index space in each view, pivoting on the
/// query midpoint.
fn model_views(idx: &MovingIndex, bx: &QueryBox) -> Vec<(ViewPoint, ViewRect)> {
    let cfg = idx.config();
    let mid = bx.midpoint();
    (0..DIMS)
        .map(|d| {
            (
                mid.view(d),
                ViewRect::new(cfg.lower[2 * d], cfg.upper[2 * d], cfg.lower[2 * d + 1], cfg.upper[2 * d + 1]),
            )
        })
        .collect()
}

struct Plan<'a> {
    buckets: Vec<&'a SkewAwareBucket>,
    own: Vec<Vec<f64>>,
    times: Vec<f64>,
    changes: Vec<Vec<u32>>,
    sort: SortStats,
}

fn plan<'a>(idx: &'a MovingIndex, bx: &QueryBox, params: &SweepParams) -> Plan<'a> {
    let eps = params.eps_time;
    let buckets: Vec<&SkewAwareBucket> = idx.buckets().filter(|b| !never_in_band(b, bx)).collect();
    let own: Vec<Vec<f64>> = buckets.iter().map(|b| own_events(b, bx, eps)).collect();

    let mut events: Vec<(f64, u32)> = Vec::with_capacity(own.iter().map(Vec::len).sum());
    for (j, ev) in own.iter().enumerate() {
        events.extend(ev.iter().map(|&s| (s, j as u32)));
    }
    let sorter = EventSorter::new(bx.t, &model_views(idx, bx), events.len());
    let (events, sort) = sorter.sort(events);

    let mut times = vec![bx.t.l];
    let mut changes: Vec<Vec<u32>> = vec![Vec::new()];
    let mut start = f64::NEG_INFINITY;
    for (s, j) in events {
        if s > start + eps {
            start = s;
            times.push(s);
            changes.push(Vec::new());
        }
        let group = changes.last_mut().expect("group opened above");
        if !group.contains(&j) {
            group.push(j);
        }
    }
    times.push(bx.t.u);
    changes.push(Vec::new());
    Plan {
        buckets,
        own,
        times,
        changes,
        sort,
    }
}

/// Boundaries of the index time intervals for `bx` with default parameters.
pub fn build_time_partition(idx: &MovingIndex, bx: &QueryBox) -> TimePartition {
    build_time_partition_with(idx, bx, &SweepParams::default())
}

pub fn build_time_partition_with(idx: &MovingIndex, bx: &QueryBox, params: &SweepParams) -> TimePartition {
    let p = plan(idx, bx, params);
    let changes = p
        .changes
        .iter()
        .map(|g| g.iter().map(|&j| p.buckets[j as usize].id).collect())
        .collect();
    TimePartition {
        times: p.times,
        changes,
    }
}

/// Runs the sweep, calling `f` once per index time interval with the
/// expected in-box fraction on that interval. Returns the event sort stats.
pub fn sweep_intervals<F>(idx: &MovingIndex, bx: &QueryBox, params: &SweepParams, mut f: F) -> SortStats
where
    F: FnMut(TimeInterval, &GeneralFormPoly),
{
    let n = idx.n();
    let p = plan(idx, bx, params);
    let mut acc = PolyAccumulator::new();
    let mut cur: Vec<GeneralFormPoly> = Vec::with_capacity(p.buckets.len());
    let mut passed = vec![0usize; p.buckets.len()];
    for (b, own) in p.buckets.iter().zip(&p.own) {
        let end = own.first().copied().unwrap_or(bx.t.u);
        let poly = delta_p_poly_at(b, bx, 0.5 * (bx.t.l + end), n);
        acc.add(&poly);
        cur.push(poly);
    }
    for i in 0..p.times.len() - 1 {
        for &j in &p.changes[i] {
            let j = j as usize;
            passed[j] += 1;
            let own = &p.own[j];
            let begin = own[passed[j] - 1];
            let end = own.get(passed[j]).copied().unwrap_or(bx.t.u);
            let poly = delta_p_poly_at(p.buckets[j], bx, 0.5 * (begin + end), n);
            acc.sub(&cur[j]);
            acc.add(&poly);
            cur[j] = poly;
        }
        f(TimeInterval::new(p.times[i], p.times[i + 1]), &acc.value());
    }
    p.sort
}

/// Expected count extreme on one index time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalExtreme {
    pub interval: TimeInterval,
    pub t: f64,
    /// Expected count, `n` times the fraction.
    pub count: f64,
    pub sign_changes: usize,
}

/// Per-interval extremes of the expected count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub mode: Extremum,
    pub intervals: Vec<IntervalExtreme>,
    /// Mean events per nonempty sorting bucket.
    pub sort_occupancy: f64,
}

impl SweepSummary {
    /// Intervals in which the scan saw more than one derivative sign change.
    pub fn multi_root_intervals(&self) -> usize {
        self.intervals.iter().filter(|e| e.sign_changes > 1).count()
    }
}

pub fn interval_extrema(idx: &MovingIndex, bx: &QueryBox, mode: Extremum, params: &SweepParams) -> SweepSummary {
    let n = idx.n() as f64;
    let mut intervals = Vec::new();
    let stats = sweep_intervals(idx, bx, params, |iv, poly| {
        let r = extremize_on_interval(poly, iv, mode, params);
        intervals.push(IntervalExtreme {
            interval: iv,
            t: r.t,
            count: n * r.value,
            sign_changes: r.sign_changes,
        });
    });
    SweepSummary {
        mode,
        intervals,
        sort_occupancy: stats.mean_occupancy,
    }
}

/// Expected in-box count at a single instant, evaluated directly.
pub fn estimated_count_at(idx: &MovingIndex, bx: &QueryBox, t: f64) -> f64 {
    let n = idx.n();
    idx.buckets()
        .map(|b| delta_p_poly_at(b, bx, t, n).eval(t))
        .sum::<f64>()
        * n as f64
}
