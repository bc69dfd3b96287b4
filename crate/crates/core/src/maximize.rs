//! Extremes of a general-form polynomial on one time interval.
//!
//! The derivative of `Σ a_k t^k + c + Σ d_k t^-k` times `t^7` is an ordinary
//! degree-12 polynomial with the same sign for `t > 0`. Its sign is scanned at
//! evenly spaced points and each sign change is refined by bisection.

use serde::{Deserialize, Serialize};

use crate::model::{TimeInterval, EPS_TIME};
use crate::poly::{horner, GeneralFormPoly};

/// Derivative scan subintervals per time interval.
pub const C_SCAN: usize = 32;
/// Bisection iterations per sign change.
pub const BISECT_MAX: usize = 10;

const NEAR_ZERO: f64 = 1e-9;

/// Tunables for the sweep and the interval search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub eps_time: f64,
    pub c_scan: usize,
    pub bisect_max: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            eps_time: EPS_TIME,
            c_scan: C_SCAN,
            bisect_max: BISECT_MAX,
        }
    }
}

impl SweepParams {
    /// Defaults, overridden by `HEXBUCKET_EPS_TIME` and `HEXBUCKET_BISECT_MAX`
    /// when those are set to valid values.
    pub fn from_env() -> Self {
        let mut p = Self::default();
        if let Some(v) = env_parse::<f64>("HEXBUCKET_EPS_TIME") {
            if v.is_finite() && v > 0.0 {
                p.eps_time = v;
            } else {
                log::warn!("ignoring HEXBUCKET_EPS_TIME={v}");
            }
        }
        if let Some(v) = env_parse::<usize>("HEXBUCKET_BISECT_MAX") {
            p.bisect_max = v;
        }
        p
    }
}

fn env_parse<T: std::str::FromStr>(key: &str) -> Option<T> {
    let raw = std::env::var(key).ok()?;
    match raw.trim().parse() {
        Ok(v) => Some(v),
        Err(_) => {
            log::warn!("ignoring unparsable {key}={raw}");
            None
        }
    }
}

/// Which extreme to look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Max,
    Min,
}

impl Extremum {
    /// True when `a` is strictly better than `b`.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Extremum::Max => a > b,
            Extremum::Min => a < b,
        }
    }
}

/// Result of searching one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalOptimum {
    pub t: f64,
    pub value: f64,
    /// Derivative sign changes seen by the scan.
    pub sign_changes: usize,
}

/// Best value of `poly` over `iv`, searched among the endpoints and the
/// derivative roots. Ties go to the earliest candidate.
pub fn extremize_on_interval(
    poly: &GeneralFormPoly,
    iv: TimeInterval,
    mode: Extremum,
    params: &SweepParams,
) -> IntervalOptimum {
    let mut best = IntervalOptimum {
        t: iv.l,
        value: poly.eval(iv.l),
        sign_changes: 0,
    };
    let consider = |t: f64, best: &mut IntervalOptimum| {
        let v = poly.eval(t);
        if mode.better(v, best.value) || (v == best.value && t < best.t) {
            best.t = t;
            best.value = v;
        }
    };
    if iv.u <= iv.l {
        return best;
    }

    let num = poly.derivative_numerator();
    let c = params.c_scan.max(1);
    let h = (iv.u - iv.l) / c as f64;
    let xs: Vec<f64> = (0..=c)
        .map(|i| if i == c { iv.u } else { iv.l + i as f64 * h })
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| horner(&num, x)).collect();
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let tiny = NEAR_ZERO * scale;

    let mut roots = Vec::new();
    for i in 0..c {
        let (a, b) = (xs[i], xs[i + 1]);
        let (ya, yb) = (ys[i], ys[i + 1]);
        if ya == 0.0 && i > 0 {
            best.sign_changes += 1;
            roots.push(a);
        } else if (ya < 0.0 && yb > 0.0) || (ya > 0.0 && yb < 0.0) {
            best.sign_changes += 1;
            roots.push(bisect(&num, a, b, ya, params.bisect_max));
        } else if ya.abs() <= tiny && yb.abs() <= tiny && scale > 0.0 {
            roots.push(0.5 * (a + b));
        }
    }
    for r in roots {
        consider(r, &mut best);
    }
    consider(iv.u, &mut best);
    best
}

fn bisect(num: &[f64; 13], mut a: f64, mut b: f64, mut ya: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        let ym = horner(num, m);
        if ym == 0.0 {
            return m;
        }
        if (ym < 0.0) == (ya < 0.0) {
            a = m;
            ya = ym;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `(t*, v*)` maximizing `poly` on `iv` with default parameters.
pub fn maximize_on_interval(poly: &GeneralFormPoly, iv: TimeInterval) -> (f64, f64) {
    let r = extremize_on_interval(poly, iv, Extremum::Max, &SweepParams::default());
    (r.t, r.value)
}

/// `(t*, v*)` minimizing `poly` on `iv` with default parameters.
pub fn minimize_on_interval(poly: &GeneralFormPoly, iv: TimeInterval) -> (f64, f64) {
    let r = extremize_on_interval(poly, iv, Extremum::Min, &SweepParams::default());
    (r.t, r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ViewPoly;
    use proptest::prelude::*;

    #[test]
    fn constant_takes_left_endpoint() {
        let p = GeneralFormPoly::constant(3.5);
        assert_eq!(maximize_on_interval(&p, TimeInterval::new(1.0, 2.0)), (1.0, 3.5));
        assert_eq!(minimize_on_interval(&p, TimeInterval::new(1.0, 2.0)), (1.0, 3.5));
    }

    #[test]
    fn interior_quadratic_maximum() {
        // -(t-2)^2 + 5 = -t^2 + 4t + 1
        let mut p = GeneralFormPoly::ZERO;
        p.0[8] = -1.0;
        p.0[7] = 4.0;
        p.0[6] = 1.0;
        let iv = TimeInterval::new(1.0, 3.0);
        let (t, v) = maximize_on_interval(&p, iv);
        assert!((t - 2.0).abs() <= iv.len() / 1024.0, "{t}");
        assert!((v - 5.0).abs() < 1e-5);
        let (tm, vm) = minimize_on_interval(&p, iv);
        assert_eq!((tm, vm), (1.0, 4.0));
    }

    #[test]
    fn example_increasing_band_peaks_at_right_end() {
        let band = ViewPoly {
            b: 15.0625,
            c: 70.5,
            ..ViewPoly::ZERO
        };
        let p = GeneralFormPoly::product3(&band, &band, &band) * (1.0 / 1_622_234.375);
        let (t, v) = maximize_on_interval(&p, TimeInterval::new(0.1, 4.0 / 9.0));
        assert_eq!(t, 4.0 / 9.0);
        assert!((v - 0.28).abs() < 0.005, "{v}");
    }

    #[test]
    fn env_override_is_read() {
        // Single test touches these variables to avoid races between tests.
        std::env::set_var("HEXBUCKET_BISECT_MAX", "3");
        std::env::set_var("HEXBUCKET_EPS_TIME", "not-a-number");
        let p = SweepParams::from_env();
        std::env::remove_var("HEXBUCKET_BISECT_MAX");
        std::env::remove_var("HEXBUCKET_EPS_TIME");
        assert_eq!(p.bisect_max, 3);
        assert_eq!(p.eps_time, EPS_TIME);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn result_stays_in_interval_and_beats_endpoints(
            coeffs in prop::array::uniform13(-3.0f64..3.0),
            l in 0.05f64..5.0,
            w in 0.01f64..5.0,
        ) {
            let p = GeneralFormPoly(coeffs);
            let iv = TimeInterval::new(l, l + w);
            let (t, v) = maximize_on_interval(&p, iv);
            prop_assert!(t >= iv.l && t <= iv.u);
            let ends = p.eval(iv.l).max(p.eval(iv.u));
            prop_assert!(v >= ends - 1e-9 * (1.0 + ends.abs()));
            let (tm, vm) = minimize_on_interval(&p, iv);
            prop_assert!(tm >= iv.l && tm <= iv.u);
            prop_assert!(vm <= p.eval(iv.l).min(p.eval(iv.u)) + 1e-9 * (1.0 + ends.abs()));
        }
    }
}
