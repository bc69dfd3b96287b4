//! Distribution-aware bucket sort for crossing-time events.
//!
//! Crossing times bunch up early in the query interval: a line rotating
//! about a query corner sweeps area much faster per unit time at small `t`.
//! The sorter models the expected density of crossings by the area a line
//! through the query midpoint sweeps over the index space, then sizes its
//! sorting buckets so that each one expects about the same number of events.

use crate::cases::view_above_at;
use crate::index::TrendLine;
use crate::model::{TimeInterval, ViewPoint, ViewRect};

/// Monotone swept-area model: area above the line right of `q` plus area
/// below it left of `q`, summed over the given views.
fn swept_area(views: &[(ViewPoint, ViewRect)], t: f64) -> f64 {
    let one = TrendLine::ONE;
    views
        .iter()
        .map(|(q, r)| {
            let mut acc = 0.0;
            if r.v_hi > q.v {
                let right = ViewRect::new(r.v_lo.max(q.v), r.v_hi, r.p_lo, r.p_hi);
                acc += view_above_at(&right, &one, &one, *q, t);
            }
            if r.v_lo < q.v {
                let left = ViewRect::new(r.v_lo, r.v_hi.min(q.v), r.p_lo, r.p_hi);
                acc += left.area() - view_above_at(&left, &one, &one, *q, t);
            }
            acc
        })
        .sum()
}

#[derive(Debug, Clone)]
struct Slice {
    l: f64,
    width: f64,
    count: usize,
    offset: usize,
}

/// Precomputed sorting-bucket layout for one query.
#[derive(Debug, Clone)]
pub struct EventSorter {
    t: TimeInterval,
    slice_len: f64,
    slices: Vec<Slice>,
    buckets: usize,
}

/// Occupancy figures from one sort.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SortStats {
    pub sorting_buckets: usize,
    pub nonempty: usize,
    /// Mean number of events per nonempty sorting bucket.
    pub mean_occupancy: f64,
    pub max_occupancy: usize,
}

impl EventSorter {
    /// Lays out about `expected` sorting buckets over `t`, allocated to
    /// equal-length time slices in proportion to the swept-area model.
    pub fn new(t: TimeInterval, views: &[(ViewPoint, ViewRect)], expected: usize) -> Self {
        let target = expected.max(1);
        let k = ((target as f64).sqrt().ceil() as usize).clamp(1, 4096);
        let slice_len = t.len() / k as f64;
        let edges: Vec<f64> = (0..=k)
            .map(|i| swept_area(views, t.l + i as f64 * slice_len))
            .collect();
        let total = edges[k] - edges[0];
        let mut slices = Vec::with_capacity(k);
        let mut offset = 0;
        for i in 0..k {
            let share = if total > 0.0 && total.is_finite() {
                ((edges[i + 1] - edges[i]) / total).max(0.0)
            } else {
                1.0 / k as f64
            };
            let count = ((target as f64 * share).round() as usize).max(1);
            slices.push(Slice {
                l: t.l + i as f64 * slice_len,
                width: slice_len / count as f64,
                count,
                offset,
            });
            offset += count;
        }
        EventSorter {
            t,
            slice_len,
            slices,
            buckets: offset,
        }
    }

    #[inline]
    fn bucket_of(&self, time: f64) -> usize {
        let i = ((time - self.t.l) / self.slice_len).floor();
        let i = if i <= 0.0 { 0 } else { (i as usize).min(self.slices.len() - 1) };
        let s = &self.slices[i];
        let j = ((time - s.l) / s.width).floor();
        let j = if j <= 0.0 { 0 } else { (j as usize).min(s.count - 1) };
        s.offset + j
    }

    /// Sorts `(time, key)` events ascending by time, then by key.
    pub fn sort<K: Ord + Copy>(&self, events: Vec<(f64, K)>) -> (Vec<(f64, K)>, SortStats) {
        let nb = self.buckets;
        let slot: Vec<usize> = events.iter().map(|e| self.bucket_of(e.0)).collect();
        let mut start = vec![0usize; nb + 1];
        for &s in &slot {
            start[s + 1] += 1;
        }
        let mut stats = SortStats {
            sorting_buckets: nb,
            ..SortStats::default()
        };
        for b in 0..nb {
            let c = start[b + 1];
            if c > 0 {
                stats.nonempty += 1;
                stats.max_occupancy = stats.max_occupancy.max(c);
            }
            start[b + 1] += start[b];
        }
        if stats.nonempty > 0 {
            stats.mean_occupancy = events.len() as f64 / stats.nonempty as f64;
        }
        let mut fill = start.clone();
        let mut out: Vec<(f64, K)> = Vec::with_capacity(events.len());
        // SAFETY-free scatter: initialise with the first event, then overwrite.
        if let Some(&first) = events.first() {
            out.resize(events.len(), first);
        }
        for (e, s) in events.into_iter().zip(slot) {
            out[fill[s]] = e;
            fill[s] += 1;
        }
        for b in 0..nb {
            let run = &mut out[start[b]..start[b + 1]];
            if run.len() > 1 {
                run.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            }
        }
        (out, stats)
    }
}

/// Sorts bare times with a sorter modeled on a single view.
pub fn sort_interval_events(
    events: Vec<f64>,
    t: TimeInterval,
    q_mid: ViewPoint,
    space: ViewRect,
) -> Vec<f64> {
    let sorter = EventSorter::new(t, &[(q_mid, space)], events.len());
    let keyed: Vec<(f64, u32)> = events.into_iter().map(|e| (e, 0)).collect();
    sorter.sort(keyed).0.into_iter().map(|e| e.0).collect()
}
