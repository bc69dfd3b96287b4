//! Error metrics and the estimated-versus-exact benchmark harness.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datagen::{generate_clustered, generate_queries, CorpusConfig, GenConfig, QueryKind};
use crate::error::Result;
use crate::estimate::{count_range, max_count_from, threshold_range_from, MaxCountResult};
use crate::exact::{exact_count_function, exact_count_range, step_extreme};
use crate::index::{GridConfig, MovingIndex, DEFAULT_SUBDIVISIONS};
use crate::intervals::{threshold_stats, IntervalSet};
use crate::maximize::{Extremum, SweepParams};
use crate::model::{normalize_query, Hex6, QueryBox};
use crate::sweep::interval_extrema;

/// `|exact - est| / exact`, or `None` when `exact` is zero.
pub fn relative_error(exact: f64, est: f64) -> Option<f64> {
    if exact == 0.0 {
        None
    } else {
        Some((exact - est).abs() / exact.abs())
    }
}

/// `(error, excess)`: the share of the exact intervals the estimate misses,
/// and the share of the estimate not backed by exact intervals.
pub fn range_errors(exact: &IntervalSet, est: &IntervalSet) -> (f64, f64) {
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    (
        ratio(exact.uncovered_by(est), exact.total_length()),
        ratio(est.uncovered_by(exact), est.total_length()),
    )
}

/// Threshold comparison for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOutcome {
    /// Threshold as a fraction of the exact maximum.
    pub fraction: f64,
    pub m: f64,
    pub range_error: f64,
    pub excess_error: f64,
    pub exact_count: usize,
    pub est_count: usize,
    pub exact_sum: f64,
    pub est_sum: f64,
    pub exact_average: f64,
    pub est_average: f64,
}

/// Both paths run on one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub exact_max: MaxCountResult,
    pub est_max: MaxCountResult,
    pub exact_count_range: u64,
    pub est_count_range: f64,
    pub thresholds: Vec<ThresholdOutcome>,
    pub exact_secs: f64,
    pub est_secs: f64,
    pub intervals: usize,
    pub multi_root_intervals: usize,
}

impl QueryOutcome {
    pub fn max_count_error(&self) -> Option<f64> {
        relative_error(self.exact_max.count, self.est_max.count)
    }

    pub fn count_range_error(&self) -> Option<f64> {
        relative_error(self.exact_count_range as f64, self.est_count_range)
    }
}

/// Runs the exact and estimated paths on `bx`. Thresholds are fractions of
/// the exact maximum.
pub fn evaluate_query(
    idx: &MovingIndex,
    points: &[Hex6],
    bx: &QueryBox,
    fractions: &[f64],
    params: &SweepParams,
) -> QueryOutcome {
    let start = Instant::now();
    let step = exact_count_function(points, bx);
    let exact_max = step_extreme(&step, Extremum::Max);
    let exact_sets: Vec<IntervalSet> = fractions.iter().map(|f| step.above(f * exact_max.count)).collect();
    let exact_cr = exact_count_range(points, bx);
    let exact_secs = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let (summary, est_max) = if idx.is_empty() {
        (None, MaxCountResult::new(bx.t.l, 0.0))
    } else {
        let s = interval_extrema(idx, bx, Extremum::Max, params);
        let m = max_count_from(&s, bx, idx.n());
        (Some(s), m)
    };
    let est_sets: Vec<IntervalSet> = fractions
        .iter()
        .map(|f| match &summary {
            Some(s) => threshold_range_from(s, f * exact_max.count),
            None => IntervalSet::new(),
        })
        .collect();
    let est_cr = count_range(idx, bx);
    let est_secs = start.elapsed().as_secs_f64();

    let thresholds = fractions
        .iter()
        .zip(exact_sets.iter().zip(&est_sets))
        .map(|(&fraction, (ex, es))| {
            let (range_error, excess_error) = range_errors(ex, es);
            let (xs, ys) = (threshold_stats(ex), threshold_stats(es));
            ThresholdOutcome {
                fraction,
                m: fraction * exact_max.count,
                range_error,
                excess_error,
                exact_count: xs.count,
                est_count: ys.count,
                exact_sum: xs.sum,
                est_sum: ys.sum,
                exact_average: xs.average,
                est_average: ys.average,
            }
        })
        .collect();
    QueryOutcome {
        exact_max,
        est_max,
        exact_count_range: exact_cr,
        est_count_range: est_cr,
        thresholds,
        exact_secs,
        est_secs,
        intervals: summary.as_ref().map_or(0, |s| s.intervals.len()),
        multi_root_intervals: summary.as_ref().map_or(0, |s| s.multi_root_intervals()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub divisions: Vec<u32>,
    pub subdivisions: usize,
    /// Generator settings; `n` is replaced by each entry of `sizes`.
    pub gen: GenConfig,
    pub corpus: CorpusConfig,
    /// Thresholds as fractions of each query's exact maximum.
    pub thresholds: Vec<f64>,
    /// Queries whose exact CountRange is below this are reported apart.
    pub min_points: u64,
    pub params: SweepParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![10_000],
            divisions: vec![5, 10],
            subdivisions: DEFAULT_SUBDIVISIONS,
            gen: GenConfig::default(),
            corpus: CorpusConfig::default(),
            thresholds: vec![0.1, 0.5],
            min_points: 100,
            params: SweepParams::default(),
        }
    }
}

/// Aggregate of one metric over the reliable queries of a cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub samples: usize,
}

impl ErrorStats {
    pub fn from_values(mut v: Vec<f64>) -> Self {
        if v.is_empty() {
            return Self::default();
        }
        v.sort_by(f64::total_cmp);
        let k = v.len();
        let median = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
        ErrorStats {
            median,
            mean: v.iter().sum::<f64>() / k as f64,
            max: v[k - 1],
            samples: k,
        }
    }
}

/// Median of a nonempty sample, `None` otherwise.
pub fn median(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| ErrorStats::from_values(v.to_vec()).median)
}

/// One report line: an operator (and threshold) at one size and resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub divisions: u32,
    pub subdivisions: usize,
    pub operator: String,
    pub threshold: Option<f64>,
    pub error: ErrorStats,
    /// Excess error, for `trange` rows.
    pub excess: Option<ErrorStats>,
    pub queries: usize,
    /// Queries with fewer than `min_points` exact hits, left out of `error`.
    pub low_count: usize,
    /// Reliable queries whose relative error is undefined (exact value 0).
    pub undefined: usize,
    pub failed: usize,
    pub exact_secs: f64,
    pub est_secs: f64,
    pub time_ratio: f64,
    pub intervals: usize,
    pub multi_root_intervals: usize,
    /// Queries whose estimated peak time moved by more than 5% of the
    /// query interval since the previous resolution.
    pub unstable: usize,
    pub seed: u64,
    pub corpus_seed: u64,
    pub gen: GenConfig,
    pub eps_time: f64,
    pub bisect_max: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

const UNSTABLE_SHARE: f64 = 0.05;

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    if cfg.corpus.count == 0 {
        return Ok(report);
    }
    for &n in &cfg.sizes {
        let gen = GenConfig { n, ..cfg.gen.clone() };
        let points = generate_clustered(&gen)?;
        let corpus = generate_queries(&points, (gen.lower, gen.upper), &cfg.corpus);
        let mut prev_peaks: Option<Vec<Option<f64>>> = None;
        for &div in &cfg.divisions {
            let grid = GridConfig::uniform(gen.lower, gen.upper, div).with_subdivisions(cfg.subdivisions);
            let idx = MovingIndex::from_points(grid, &points)?;
            let mut outcomes: Vec<(QueryKind, f64, QueryOutcome)> = Vec::new();
            let mut peaks = Vec::with_capacity(corpus.len());
            let mut failed = 0;
            for q in &corpus {
                match normalize_query(q.a, q.b, q.t) {
                    Ok(bx) => {
                        let o = evaluate_query(&idx, &points, &bx, &cfg.thresholds, &cfg.params);
                        peaks.push(Some(o.est_max.t_max));
                        outcomes.push((q.kind, bx.t.len(), o));
                    }
                    Err(e) => {
                        log::warn!("query skipped: {e}");
                        failed += 1;
                        peaks.push(None);
                    }
                }
            }
            let unstable = match &prev_peaks {
                Some(prev) => prev
                    .iter()
                    .zip(&peaks)
                    .zip(&corpus)
                    .filter(|((a, b), q)| match (a, b) {
                        (Some(a), Some(b)) => (a - b).abs() > UNSTABLE_SHARE * q.t.len(),
                        _ => false,
                    })
                    .count(),
                None => 0,
            };
            prev_peaks = Some(peaks);
            let base = BenchRow {
                n,
                divisions: div,
                subdivisions: cfg.subdivisions,
                operator: String::new(),
                threshold: None,
                error: ErrorStats::default(),
                excess: None,
                queries: outcomes.len(),
                low_count: 0,
                undefined: 0,
                failed,
                exact_secs: outcomes.iter().map(|o| o.2.exact_secs).sum(),
                est_secs: outcomes.iter().map(|o| o.2.est_secs).sum(),
                time_ratio: 0.0,
                intervals: outcomes.iter().map(|o| o.2.intervals).sum(),
                multi_root_intervals: outcomes.iter().map(|o| o.2.multi_root_intervals).sum(),
                unstable,
                seed: gen.seed,
                corpus_seed: cfg.corpus.seed,
                gen: gen.clone(),
                eps_time: cfg.params.eps_time,
                bisect_max: cfg.params.bisect_max,
            };
            let reliable: Vec<&QueryOutcome> = outcomes
                .iter()
                .map(|o| &o.2)
                .filter(|o| o.exact_count_range >= cfg.min_points)
                .collect();
            let low_count = outcomes.len() - reliable.len();
            let ratio = if base.est_secs > 0.0 { base.exact_secs / base.est_secs } else { 0.0 };
            let row = |op: &str, th: Option<f64>, vals: Vec<Option<f64>>, excess: Option<Vec<f64>>| {
                let undefined = vals.iter().filter(|v| v.is_none()).count();
                BenchRow {
                    operator: op.to_string(),
                    threshold: th,
                    error: ErrorStats::from_values(vals.into_iter().flatten().collect()),
                    excess: excess.map(ErrorStats::from_values),
                    low_count,
                    undefined,
                    time_ratio: ratio,
                    ..base.clone()
                }
            };
            report.rows.push(row("maxcount", None, reliable.iter().map(|o| o.max_count_error()).collect(), None));
            report.rows.push(row("countrange", None, reliable.iter().map(|o| o.count_range_error()).collect(), None));
            for (k, &f) in cfg.thresholds.iter().enumerate() {
                let th: Vec<&ThresholdOutcome> = reliable.iter().map(|o| &o.thresholds[k]).collect();
                report.rows.push(row(
                    "trange",
                    Some(f),
                    th.iter().map(|t| Some(t.range_error)).collect(),
                    Some(th.iter().map(|t| t.excess_error).collect()),
                ));
                report.rows.push(row(
                    "tcount",
                    Some(f),
                    th.iter().map(|t| Some((t.exact_count as f64 - t.est_count as f64).abs())).collect(),
                    None,
                ));
                report.rows.push(row(
                    "tsum",
                    Some(f),
                    th.iter().map(|t| relative_error(t.exact_sum, t.est_sum)).collect(),
                    None,
                ));
                report.rows.push(row(
                    "tavg",
                    Some(f),
                    th.iter().map(|t| relative_error(t.exact_average, t.est_average)).collect(),
                    None,
                ));
            }
            log::info!(
                "n={n} divisions={div}: {} queries, {} reliable, exact/est time {:.2}",
                outcomes.len(),
                reliable.len(),
                ratio
            );
        }
    }
    Ok(report)
}

impl BenchReport {
    /// Fixed-width summary: error medians by operator, resolution and size.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>9} {:>5} {:<10} {:>6} {:>9} {:>9} {:>9} {:>9} {:>7} {:>5} {:>5} {:>8}",
            "n", "div", "operator", "thr", "median", "mean", "max", "excess", "queries", "low", "undef", "ex/est"
        );
        for r in &self.rows {
            let th = r.threshold.map_or("-".to_string(), |t| format!("{t}"));
            let ex = r.excess.map_or("-".to_string(), |e| format!("{:.4}", e.median));
            let _ = writeln!(
                s,
                "{:>9} {:>5} {:<10} {:>6} {:>9.4} {:>9.4} {:>9.4} {:>9} {:>7} {:>5} {:>5} {:>8.2}",
                r.n,
                r.divisions,
                r.operator,
                th,
                r.error.median,
                r.error.mean,
                r.error.max,
                ex,
                r.queries,
                r.low_count,
                r.undefined,
                r.time_ratio
            );
        }
        s
    }
}
