mod common;

use hexbucket::bench::range_errors;
use hexbucket::cases::{classify_case, view_above_at, CaseTag};
use hexbucket::estimate::max_count;
use hexbucket::index::{AxisHistogram, TrendLine};
use hexbucket::model::{containment_interval, vertex_cross_times, ViewPoint, ViewRect, DIMS};
use hexbucket::*;
use proptest::prelude::*;

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn band_nonnegative(seed in any::<u64>()) {
        common::band_nonnegative(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn count_continuous(seed in any::<u64>()) {
        common::count_continuous(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn threshold_monotone(seed in any::<u64>()) {
        common::threshold_monotone(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn max_threshold_consistent(seed in any::<u64>()) {
        common::max_threshold_consistent(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn insert_remove_identity(seed in any::<u64>()) {
        common::insert_remove_identity(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn generator_deterministic(seed in any::<u64>()) {
        common::generator_deterministic(seed).map_err(TestCaseError::fail)?;
    }
}

fn hex() -> impl Strategy<Value = Hex6> {
    prop::array::uniform6(-10.0f64..10.0).prop_map(Hex6)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn domination_matches_views(q in hex(), p in hex(), s in 0.01f64..10.0) {
        let below_every_line = (0..DIMS).all(|d| {
            let (qv, pv) = (q.view(d), p.view(d));
            pv.p < qv.line_at(s, pv.v)
        });
        prop_assert_eq!(q.dominates(&p, s), below_every_line);
    }

    #[test]
    fn containment_ends_touch_a_face(p in hex(), c in hex(), w in prop::array::uniform6(0.1f64..5.0), l in 0.1f64..3.0, len in 0.1f64..5.0) {
        let a = Hex6(std::array::from_fn(|i| c.0[i] - w[i]));
        let b = Hex6(std::array::from_fn(|i| c.0[i] + w[i]));
        let bx = normalize_query(a, b, TimeInterval::new(l, l + len)).unwrap();
        if let Some(iv) = containment_interval(&p, &bx) {
            for (s, is_clip) in [(iv.l, iv.l == bx.t.l), (iv.u, iv.u == bx.t.u)] {
                if is_clip {
                    continue;
                }
                let touches = (0..DIMS).any(|d| {
                    let x = p.coord_at(d, s);
                    (x - bx.lo.coord_at(d, s)).abs() < 1e-9 || (x - bx.hi.coord_at(d, s)).abs() < 1e-9
                });
                prop_assert!(touches, "no face at {}", s);
            }
            let mid = iv.mid();
            prop_assert!(bx.hi.dominates(&p, mid) && p.dominates(&bx.lo, mid));
        }
    }

    #[test]
    fn cross_times_are_sampled_sign_changes(qv in 0.0f64..10.0, qp in 0.0f64..10.0, v0 in 0.0f64..5.0, p0 in 0.0f64..5.0) {
        let rect = ViewRect::new(v0, v0 + 5.0, p0, p0 + 5.0);
        let q = ViewPoint::new(qv, qp);
        let t = TimeInterval::new(0.1, 10.0);
        let got = vertex_cross_times(q, &rect, t);
        for c in rect.corners() {
            let f = |s: f64| c.p - q.line_at(s, c.v);
            let steps = 4000;
            for k in 0..steps {
                let a = t.l + t.len() * k as f64 / steps as f64;
                let b = t.l + t.len() * (k + 1) as f64 / steps as f64;
                if f(a) * f(b) < 0.0 {
                    prop_assert!(got.iter().any(|&s| s >= a - 1e-9 && s <= b + 1e-9), "missed root in [{}, {}]", a, b);
                }
            }
        }
        for &s in &got {
            prop_assert!(rect.corners().iter().any(|c| (c.p - q.line_at(s, c.v)).abs() < 1e-9));
        }
    }

    #[test]
    fn case_integral_matches_quadrature(
        qv in -5.0f64..15.0, qp in -5.0f64..15.0, t in 0.05f64..5.0,
        gs in -1.0f64..1.0, hs in -1.0f64..1.0,
    ) {
        let rect = ViewRect::new(0.0, 10.0, 0.0, 10.0);
        let g = TrendLine { slope: gs, intercept: 12.0, shift: 0.0 };
        let h = TrendLine { slope: hs, intercept: 12.0, shift: 0.0 };
        let q = ViewPoint::new(qv, qp);
        let tag = classify_case(q, &rect, t);
        let got = view_above_at(&rect, &g, &h, q, t);
        // Column-wise: exact inner integral over p; over v, Simpson's rule on
        // the pieces between the points where the line leaves the rectangle,
        // where the integrand is a cubic.
        let hp = |p: f64| 0.5 * hs * p * p + 12.0 * p;
        let column = |v: f64| {
            let cut = q.line_at(t, v).clamp(0.0, 10.0);
            g.eval(v) * (hp(10.0) - hp(cut))
        };
        let mut knots = vec![0.0, 10.0];
        for edge in [0.0, 10.0] {
            let v = q.v + (q.p - edge) / t;
            if v > 0.0 && v < 10.0 {
                knots.push(v);
            }
        }
        knots.sort_by(f64::total_cmp);
        let mut want = 0.0;
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            want += (b - a) / 6.0 * (column(a) + 4.0 * column(0.5 * (a + b)) + column(b));
        }
        prop_assert!((got - want).abs() <= 1e-6 * want.abs() + 1e-9, "{:?}: {} vs {}", tag, got, want);
        if tag == CaseTag::Empty {
            prop_assert_eq!(got, 0.0);
        }
    }

    #[test]
    fn rebuild_matches_incremental(seed in any::<u64>()) {
        let inst = common::instance(seed);
        let mut inc = MovingIndex::new(inst.idx.config().clone()).unwrap();
        let mut pts = inst.points.clone();
        pts.reverse();
        for p in &pts {
            inc.insert(p).unwrap();
        }
        let mut a: Vec<_> = inst.idx.buckets().cloned().collect();
        let mut b: Vec<_> = inc.buckets().cloned().collect();
        a.sort_by_key(|x| x.id);
        b.sort_by_key(|x| x.id);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn normalization_holds(seed in any::<u64>()) {
        let inst = common::instance(seed);
        let n = inst.idx.n();
        let mut total = 0.0;
        for b in inst.idx.buckets() {
            let frac = b.point_fraction(n);
            let want = b.count as f64 / n as f64;
            prop_assert!((frac - want).abs() <= 1e-6 * want);
            total += frac;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn denser_side_has_more_mass(counts in prop::collection::vec(0u32..20, 5), u1 in 0.0f64..1.0, u2 in 0.0f64..1.0, width in 0.5f64..3.0) {
        prop_assume!(counts.iter().sum::<u32>() > 0);
        let h = AxisHistogram::from_counts(counts);
        let f = hexbucket::index::fit_axis_trend(&h, 0.0, 10.0);
        // Two congruent slabs, the second offset in the trend direction.
        let room = 10.0 - width;
        let a = u1 * room;
        let b = if f.slope >= 0.0 { a + u2 * (room - a) } else { u2 * a };
        prop_assert!(f.integral(b, b + width) >= f.integral(a, a + width) - 1e-9);
    }

    #[test]
    fn exact_results_ignore_point_order(seed in any::<u64>()) {
        let inst = common::instance(seed);
        let mut rev = inst.points.clone();
        rev.reverse();
        for mode in [Extremum::Max, Extremum::Min] {
            prop_assert_eq!(exact_max_count(&inst.points, &inst.bx, mode), exact_max_count(&rev, &inst.bx, mode));
        }
        prop_assert_eq!(exact_count_range(&inst.points, &inst.bx), exact_count_range(&rev, &inst.bx));
        let th = exact_threshold_ops(&inst.points, &inst.bx, 1.0);
        prop_assert_eq!(th, exact_threshold_ops(&rev, &inst.bx, 1.0));
    }

    #[test]
    fn exact_invariants(seed in any::<u64>()) {
        let inst = common::instance(seed);
        let f = exact_count_function(&inst.points, &inst.bx);
        let mut c = f.initial;
        prop_assert!(c >= 0);
        for &(_, d) in &f.events {
            c += d;
            prop_assert!(c >= 0);
        }
        let m = exact_max_count(&inst.points, &inst.bx, Extremum::Max);
        let cr = exact_count_range(&inst.points, &inst.bx);
        prop_assert!(cr as f64 >= m.count);
        let all = exact_threshold_ops(&inst.points, &inst.bx, -1.0);
        prop_assert!((all.stats.sum - inst.bx.t.len()).abs() < 1e-9);
    }

    #[test]
    fn estimate_bounds(seed in any::<u64>()) {
        let inst = common::instance(seed);
        let n = inst.idx.n() as f64;
        let hi = max_count(&inst.idx, &inst.bx, Extremum::Max);
        let lo = max_count(&inst.idx, &inst.bx, Extremum::Min);
        prop_assert!(hi.count >= 0.0 && hi.count <= n);
        prop_assert!(lo.count <= hi.count);
        prop_assert!(hi.t_max >= inst.bx.t.l && hi.t_max <= inst.bx.t.u);
        let cr = count_range(&inst.idx, &inst.bx);
        prop_assert!((0.0..=n).contains(&cr));
        let st = threshold_stats(&threshold_range(&inst.idx, &inst.bx, 0.5 * hi.count));
        prop_assert!(st.sum <= inst.bx.t.len() + 1e-12);
    }

    #[test]
    fn range_errors_swap(a in prop::collection::vec((0.0f64..10.0, 0.01f64..2.0), 1..6), b in prop::collection::vec((0.0f64..10.0, 0.01f64..2.0), 1..6)) {
        let set = |v: &[(f64, f64)]| IntervalSet::from_intervals(v.iter().map(|&(l, w)| TimeInterval::new(l, l + w)).collect());
        let (a, b) = (set(&a), set(&b));
        prop_assert_eq!(range_errors(&a, &a), (0.0, 0.0));
        if (a.total_length() - b.total_length()).abs() < 1e-12 {
            let (e1, x1) = range_errors(&a, &b);
            let (e2, x2) = range_errors(&b, &a);
            prop_assert!((e1 - x2).abs() < 1e-12 && (x1 - e2).abs() < 1e-12);
        }
    }
}
