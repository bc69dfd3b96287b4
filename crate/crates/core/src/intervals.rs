//! Sorted, disjoint sets of half-open time intervals.

use serde::{Deserialize, Serialize};

use crate::model::TimeInterval;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<TimeInterval>,
}

impl IntervalSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sorts, drops empty intervals and merges overlapping or touching ones.
    pub fn from_intervals(mut ivs: Vec<TimeInterval>) -> Self {
        ivs.retain(|iv| iv.u > iv.l);
        ivs.sort_by(|a, b| a.l.total_cmp(&b.l));
        let mut set = Self::new();
        for iv in ivs {
            set.push(iv);
        }
        set
    }

    /// Appends an interval that starts no earlier than the last one,
    /// merging when they touch.
    pub fn push(&mut self, iv: TimeInterval) {
        if iv.u <= iv.l {
            return;
        }
        match self.intervals.last_mut() {
            Some(last) if iv.l <= last.u => last.u = last.u.max(iv.u),
            _ => self.intervals.push(iv),
        }
    }

    pub fn intervals(&self) -> &[TimeInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(TimeInterval::len).sum()
    }

    pub fn contains(&self, s: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(s))
    }

    /// Length of `self` not covered by `other`.
    pub fn uncovered_by(&self, other: &IntervalSet) -> f64 {
        let mut total = 0.0;
        let mut j = 0;
        let b = &other.intervals;
        for iv in &self.intervals {
            let mut covered = 0.0;
            while j < b.len() && b[j].u <= iv.l {
                j += 1;
            }
            let mut k = j;
            while k < b.len() && b[k].l < iv.u {
                covered += (b[k].u.min(iv.u) - b[k].l.max(iv.l)).max(0.0);
                k += 1;
            }
            total += iv.len() - covered;
        }
        total.max(0.0)
    }
}

/// Number of intervals, their total length and their mean length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdStats {
    pub count: usize,
    pub sum: f64,
    pub average: f64,
}

pub fn threshold_stats(ts: &IntervalSet) -> ThresholdStats {
    let count = ts.len();
    let sum = ts.total_length();
    ThresholdStats {
        count,
        sum,
        average: if count == 0 { 0.0 } else { sum / count as f64 },
    }
}
