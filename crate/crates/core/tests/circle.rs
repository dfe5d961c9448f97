use std::sync::{Arc, LazyLock};

use proptest::prelude::*;
use torus_lab::circle::{
    continued_fraction, irrationality_report, rotation_number, DenjoyMap, DenjoySpec, GapLocation,
};
use torus_lab::{CircleLift, QuadraticIrrational};

fn denjoy(alpha: QuadraticIrrational, n: usize) -> Arc<DenjoyMap> {
    let spec = DenjoySpec::with_total_gap(alpha, 0.5, 4.0, n).unwrap();
    Arc::new(DenjoyMap::build(spec).unwrap())
}

fn golden_map() -> Arc<DenjoyMap> {
    denjoy(QuadraticIrrational::golden(), 2000)
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[test]
fn rigid_lift_examples() {
    let r = CircleLift::rigid(0.25);
    assert!((r.eval(0.9) - 1.15).abs() < 1e-15);
    assert!((r.inverse_eval(1.15).unwrap() - 0.9).abs() < 1e-15);
    let shifted = CircleLift::rigid(0.3).compose_rotation(0.2);
    for x in [0.0, 0.37, 0.99, -2.5] {
        assert!((shifted.eval(x) - (x + 0.5)).abs() < 1e-15);
    }
}

#[test]
fn gap_table_mass() {
    let g = golden_map();
    assert_eq!(g.gap_count(), 4001);
    let table: f64 = g.gaps().map(|e| e.length).sum();
    // brute-force Σ_{|n|≤N} c₀(|n|+1)^{-4}
    let c0 = g.spec().gap_coefficient;
    let brute: f64 = c0 * (1.0 + 2.0 * (2..=2001u64).map(|k| (k as f64).powi(-4)).sum::<f64>());
    assert!((table - brute).abs() < 1e-12);
    assert!((table - (0.5 - g.spec().tail_bound())).abs() < 1e-12);
    // disjoint and sorted
    let entries: Vec<_> = g.gaps().collect();
    for w in entries.windows(2) {
        assert!(w[0].right() < w[1].left);
    }
}

#[test]
fn gap_endpoint_maps_to_next_endpoint() {
    let g = golden_map();
    for n in [-1999i64, -500, -1, 0, 1, 7, 1998] {
        let (a, b) = (g.gap(n).unwrap(), g.gap(n + 1).unwrap());
        assert!(circle_gap(g.eval(a.left), b.left) < 1e-13, "gap {n}");
        assert!(circle_gap(g.eval(a.right()), b.right()) < 1e-13, "gap {n}");
    }
}

#[test]
fn gap_shift_property() {
    let g = golden_map();
    for n in -1998..1999i64 {
        let mid = g.gap(n).unwrap().midpoint();
        assert_eq!(
            g.gap_locate(g.eval(mid)).gap_index(),
            Some(n + 1),
            "gap {n}"
        );
    }
}

#[test]
fn gap_locate_examples() {
    let g = golden_map();
    assert_eq!(
        g.gap_locate(g.gap(0).unwrap().midpoint()).gap_index(),
        Some(0)
    );
    for n in [-2000i64, -3, 0, 5, 2000] {
        assert!(g.gap_locate(g.gap(n).unwrap().left).is_cantor());
    }
    match g.gap_locate(g.gap(4).unwrap().left + 1e-6) {
        GapLocation::Gap {
            index,
            distance_to_minimal,
        } => {
            assert_eq!(index, 4);
            assert!((distance_to_minimal - 1e-6).abs() < 1e-12);
        }
        other => panic!("expected a gap, got {other:?}"),
    }
}

#[test]
fn inverse_of_gap_point_lands_in_preceding_gap() {
    let g = golden_map();
    let lift = CircleLift::denjoy(g.clone());
    for n in [-100i64, 0, 3, 1500] {
        let e = g.gap(n).unwrap();
        let y = e.left + 0.3 * e.length;
        let x = lift.inverse_eval(y).unwrap();
        assert_eq!(g.gap_locate(x).gap_index(), Some(n - 1));
    }
}

#[test]
fn wandering_interval_never_returns() {
    let g = golden_map();
    let mut p = g.gap(-1000).unwrap().midpoint();
    for k in 1..=100_000i64 {
        p = g.eval(p).rem_euclid(1.0);
        let loc = g.gap_locate(p).gap_index();
        if -1000 + k <= 2000 {
            assert_eq!(loc, Some(-1000 + k));
        } else {
            assert_ne!(loc, Some(-1000));
        }
    }
}

#[test]
fn doubling_truncation_moves_map_by_tail_mass() {
    let a = denjoy(QuadraticIrrational::golden(), 2000);
    let b = denjoy(QuadraticIrrational::golden(), 4000);
    let delta = a.spec().tail_bound();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let x = (i as f64 + 0.5) / 1000.0;
        worst = worst.max((a.eval(x) - b.eval(x)).abs());
    }
    assert!(
        worst <= delta,
        "sup distance {worst:e} exceeds δ(N) = {delta:e}"
    );
}

#[test]
fn rigid_rotation_number_error() {
    let alpha = QuadraticIrrational::golden().value();
    let lift = CircleLift::rigid(alpha);
    for n in [100u64, 1000, 10_000] {
        let est = rotation_number(&lift, n, 0.3);
        assert!((est.estimate - alpha).abs() <= 1.0 / n as f64);
        assert_eq!(est.error_bound, 1.0 / n as f64);
    }
}

#[test]
fn denjoy_rotation_number_matches_prescribed() {
    let g = denjoy(QuadraticIrrational::silver(), 2000);
    let lift = CircleLift::denjoy(g.clone());
    let n = 100_000;
    let est = rotation_number(&lift, n, 0.77);
    let alpha = 2f64.sqrt() - 1.0;
    assert!((est.estimate - alpha).abs() <= 1.0 / n as f64 + g.spec().tail_bound());
    let same = rotation_number(&lift.compose_rotation(0.0), n, 0.77);
    assert_eq!(same.estimate, est.estimate);
}

#[test]
fn composed_rotation_raises_rotation_number() {
    let g = denjoy(QuadraticIrrational::silver(), 2000);
    let lift = CircleLift::denjoy(g);
    let n = 1_000_000;
    let plain = rotation_number(&lift, n, 0.0).estimate;
    let rotated = rotation_number(&lift.compose_rotation(0.05), n, 0.0).estimate;
    assert!(rotated - plain > 2.0 / n as f64);
}

#[test]
fn rotation_number_monotone_in_theta() {
    let lift = CircleLift::denjoy(golden_map());
    let n = 1_000_000;
    let thetas = [0.0, 0.01, 0.03, 0.2];
    let est: Vec<f64> = thetas
        .iter()
        .map(|&t| rotation_number(&lift.compose_rotation(t), n, 0.1).estimate)
        .collect();
    for w in est.windows(2) {
        assert!(w[0] <= w[1] + 2e-6);
    }
}

#[test]
fn invalid_specs_rejected() {
    let q = QuadraticIrrational::golden();
    assert!(DenjoySpec::new(q, 0.9, 4.0, 2000).is_err());
    assert!(DenjoySpec::with_total_gap(q, 0.5, 4.0, 10).is_err());
    assert!(DenjoySpec::with_total_gap(q, 0.5, 0.9, 2000).is_err());
    assert!(DenjoySpec::new(QuadraticIrrational::new(1, 1, 4, 3), 0.1, 4.0, 2000).is_err());
}

#[test]
fn golden_ratio_has_unit_partial_quotients() {
    let cf = continued_fraction(QuadraticIrrational::golden().value(), 100_000);
    assert!(cf.iter().skip(1).all(|&a| a == 1));
    assert!(irrationality_report(0.5, 1000).suspicious);
    assert!(!irrationality_report(QuadraticIrrational::silver().value(), 100_000).suspicious);
}

static GOLDEN_MAP: LazyLock<Arc<DenjoyMap>> = LazyLock::new(golden_map);

static LIFTS: LazyLock<Vec<CircleLift>> = LazyLock::new(|| {
    vec![
        CircleLift::rigid(0.618_033_988_749_894_8),
        CircleLift::denjoy(GOLDEN_MAP.clone()),
        CircleLift::denjoy(GOLDEN_MAP.clone()).compose_rotation(0.05),
    ]
});

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn degree_one(x in -5.0f64..5.0, which in 0usize..3) {
        let l = &LIFTS[which];
        prop_assert!((l.eval(x + 1.0) - l.eval(x) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn strictly_increasing(x in -2.0f64..2.0, d in 1e-9f64..0.5, which in 0usize..3) {
        let l = &LIFTS[which];
        prop_assert!(l.eval(x) < l.eval(x + d));
    }

    #[test]
    fn inverse_round_trip(x in -3.0f64..3.0, which in 0usize..3) {
        let l = &LIFTS[which];
        prop_assert!((l.inverse_eval(l.eval(x)).unwrap() - x).abs() <= 1e-9);
    }

    #[test]
    fn gap_points_stay_in_gaps(t in 0.0f64..1.0) {
        let g = &*GOLDEN_MAP;
        if let Some(n) = g.gap_locate(t).gap_index() {
            let next = g.gap_locate(g.eval(t)).gap_index();
            if n < 2000 {
                prop_assert_eq!(next, Some(n + 1));
            }
        }
    }
}
