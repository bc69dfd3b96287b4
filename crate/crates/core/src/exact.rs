//! Exact operators over the raw point set.

use serde::{Deserialize, Serialize};

use crate::estimate::MaxCountResult;
use crate::intervals::{threshold_stats, IntervalSet, ThresholdStats};
use crate::maximize::Extremum;
use crate::model::{containment_interval, Hex6, QueryBox, TimeInterval};

/// Events closer than this are merged into one.
pub const COALESCE_EPS: f64 = 1e-12;

/// Piecewise-constant in-box count over the query interval, right-continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountStepFunction {
    pub t: TimeInterval,
    pub initial: i64,
    /// Sorted `(time, net change)` pairs strictly inside `t`.
    pub events: Vec<(f64, i64)>,
}

impl CountStepFunction {
    pub fn count_at(&self, s: f64) -> i64 {
        self.initial
            + self
                .events
                .iter()
                .take_while(|e| e.0 <= s)
                .map(|e| e.1)
                .sum::<i64>()
    }

    /// Constant pieces `([l, u), count)` covering `t`.
    pub fn pieces(&self) -> Vec<(TimeInterval, i64)> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        let mut start = self.t.l;
        let mut c = self.initial;
        for &(s, d) in &self.events {
            out.push((TimeInterval::new(start, s), c));
            start = s;
            c += d;
        }
        out.push((TimeInterval::new(start, self.t.u), c));
        out
    }

    /// Maximal spans where the count exceeds `m`.
    pub fn above(&self, m: f64) -> IntervalSet {
        let mut set = IntervalSet::new();
        for (iv, c) in self.pieces() {
            if c as f64 > m {
                set.push(iv);
            }
        }
        set
    }
}

pub fn exact_count_function(points: &[Hex6], bx: &QueryBox) -> CountStepFunction {
    let mut initial = 0;
    let mut raw = Vec::new();
    for p in points {
        let Some(iv) = containment_interval(p, bx) else {
            continue;
        };
        if iv.l <= bx.t.l {
            initial += 1;
        } else {
            raw.push((iv.l, 1));
        }
        if iv.u < bx.t.u {
            raw.push((iv.u, -1));
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut events: Vec<(f64, i64)> = Vec::with_capacity(raw.len());
    let mut group_start = f64::NEG_INFINITY;
    for (s, d) in raw {
        match events.last_mut() {
            Some(last) if s - group_start <= COALESCE_EPS => last.1 += d,
            _ => {
                group_start = s;
                events.push((s, d));
            }
        }
    }
    events.retain(|e| e.1 != 0);
    CountStepFunction {
        t: bx.t,
        initial,
        events,
    }
}

/// Extreme of a step function; the time is the first instant attaining it.
pub fn step_extreme(f: &CountStepFunction, mode: Extremum) -> MaxCountResult {
    let mut best_t = f.t.l;
    let mut best = f.initial;
    let mut c = f.initial;
    for &(s, d) in &f.events {
        c += d;
        if mode.better(c as f64, best as f64) {
            best = c;
            best_t = s;
        }
    }
    MaxCountResult::new(best_t, best as f64)
}

pub fn exact_max_count(points: &[Hex6], bx: &QueryBox, mode: Extremum) -> MaxCountResult {
    step_extreme(&exact_count_function(points, bx), mode)
}

/// Exact ThresholdRange together with its count, sum and average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactThreshold {
    pub intervals: IntervalSet,
    pub stats: ThresholdStats,
}

pub fn exact_threshold_ops(points: &[Hex6], bx: &QueryBox, m: f64) -> ExactThreshold {
    let intervals = exact_count_function(points, bx).above(m);
    let stats = threshold_stats(&intervals);
    ExactThreshold { intervals, stats }
}

pub fn exact_count_range(points: &[Hex6], bx: &QueryBox) -> u64 {
    points
        .iter()
        .filter(|p| containment_interval(p, bx).is_some())
        .count() as u64
}
