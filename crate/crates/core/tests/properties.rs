use proptest::prelude::*;

use besov_core::corpus::{gen_corpus, CorpusConfig, Family};
use besov_core::diff::finite_difference;
use besov_core::grid::{cubes_in_box, GridFunction, Region};
use besov_core::hardy::{conjugate_exponent, hardy_condition, lq_norm, HardyDirection, PositiveSequence};
use besov_core::harness::{evaluate_norm, NormSpec};
use besov_core::spline::cardinal_bspline;
use besov_core::weights::{bar_transform, make_weights, WeightSpec};

fn bump(level: u32, c: f64, w: f64, a: f64) -> GridFunction {
    GridFunction::from_fn(1, level, 2.0, |x| {
        let u = (x[0] - c) / w;
        if u.abs() < 1.0 {
            a * (1.0 - u * u).powi(3)
        } else {
            0.0
        }
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_are_homogeneous(
        c in -0.5f64..0.5,
        w in 0.1f64..0.5,
        lambda in 0.01f64..100.0,
        which in 0usize..4,
        q in prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY)],
    ) {
        let f = bump(7, c, w, 1.0);
        let t = make_weights(&WeightSpec::two_ks(0.5, 2.0, 1.0), 1, 7, 2.0, 3).unwrap();
        let spec = [
            NormSpec::Conv { m: 2, support_radius: 0.75, bar: false },
            NormSpec::Diff { l: 2 },
            NormSpec::Spline { l: 2 },
            NormSpec::Fourier,
        ][which].clone();
        let a = evaluate_norm(&f, &t, &spec, 2.0, q, 1.0, 3).unwrap().value;
        let b = evaluate_norm(&f.scaled(lambda), &t, &spec, 2.0, q, 1.0, 3).unwrap().value;
        prop_assert!((b - lambda * a).abs() <= 1e-12 * lambda * a, "{} {} vs {}", spec.label(), b, lambda * a);
    }

    #[test]
    fn conjugate_is_an_involution(s in 1.0001f64..1e4) {
        let back = conjugate_exponent(conjugate_exponent(s).unwrap()).unwrap();
        prop_assert!((back - s).abs() <= 1e-9 * s);
    }

    #[test]
    fn lq_norm_decreases_in_q(terms in prop::collection::vec(1e-3f64..1e3, 1..40), q1 in 0.2f64..8.0, dq in 0.0f64..8.0) {
        let a = PositiveSequence::from_terms(&terms).unwrap();
        let small = lq_norm(&a, q1 + dq);
        let big = lq_norm(&a, q1);
        prop_assert!(small <= big * (1.0 + 1e-12));
        prop_assert!(lq_norm(&a, f64::INFINITY) <= small * (1.0 + 1e-12));
    }

    #[test]
    fn hardy_product_ignores_scaling(slope in -2.0f64..2.0, c in -20.0f64..20.0, s in 1.0f64..4.0, head in any::<bool>()) {
        let dir = if head { HardyDirection::Head } else { HardyDirection::Tail };
        let base = PositiveSequence::from_log2((0..40).map(|k| slope * k as f64).collect()).unwrap();
        let shifted = PositiveSequence::from_log2((0..40).map(|k| slope * k as f64 + c).collect()).unwrap();
        let a = hardy_condition(&base, s, dir, 20).unwrap();
        let b = hardy_condition(&shifted, s, dir, 20).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn bar_transform_is_idempotent(s in -1.0f64..2.0, beta in -0.4f64..0.6, dim in 1usize..3) {
        let level = if dim == 1 { 7 } else { 5 };
        let t = make_weights(&WeightSpec::power(s, beta, 2.0, 1.0), dim, level, 1.0, 2).unwrap();
        let once = bar_transform(&t).unwrap();
        let twice = bar_transform(&once).unwrap();
        for (a, b) in once.levels.iter().zip(&twice.levels) {
            prop_assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn bsplines_partition_unity(l in 0u32..6, t in -50.0f64..50.0) {
        let base = t.floor() as i64;
        let sum: f64 = (base - l as i64 - 1..=base + 1).map(|m| cardinal_bspline(l, t - m as f64)).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dyadic_cubes_tile_the_box(k in 0u32..5, lo in prop::collection::vec(-3.0f64..0.0, 2), ext in prop::collection::vec(0.1f64..3.0, 2)) {
        let hi: Vec<f64> = lo.iter().zip(&ext).map(|(a, e)| a + e).collect();
        let region = Region::new(lo.clone(), hi.clone()).unwrap();
        let cubes = cubes_in_box(k, &region);
        let side = (-(k as f64)).exp2();
        let mut covered = 0.0;
        for q in &cubes {
            let b = q.bounds(1.0);
            let mut vol = 1.0;
            for (ax, (a, bb)) in b.iter().enumerate() {
                prop_assert!((bb - a - side).abs() < 1e-12);
                vol *= (bb.min(hi[ax]) - a.max(lo[ax])).max(0.0);
            }
            prop_assert!(vol > 0.0);
            covered += vol;
        }
        prop_assert!((covered - ext[0] * ext[1]).abs() <= 1e-9);
        for w in cubes.windows(2) {
            prop_assert!(w[0].m < w[1].m);
        }
    }

    #[test]
    fn grid_csv_round_trips(vals in prop::collection::vec(-1e6f64..1e6, 16)) {
        let f = GridFunction::from_values(1, 2, 2.0, vals).unwrap();
        let g = GridFunction::from_csv(&f.to_csv()).unwrap();
        prop_assert_eq!(f, g);
    }

    #[test]
    fn differences_annihilate_low_degree(l in 1u32..5, coeffs in prop::collection::vec(-2.0f64..2.0, 4), cells in 1i64..6) {
        let deg = (l - 1) as usize;
        let f = GridFunction::from_fn(1, 6, 2.0, |x| coeffs[..=deg].iter().rev().fold(0.0, |acc, c| acc * x[0] + c)).unwrap();
        let h = cells as f64 * f.spacing();
        let d = finite_difference(&f, &[h], l).unwrap();
        let scale: f64 = coeffs.iter().map(|c| c.abs()).sum::<f64>() * 2f64.powi(deg as i32);
        for i in 0..f.len() {
            if f.center(i) + l as f64 * h < 2.0 {
                prop_assert!(d.values()[i].abs() <= 1e-11 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn corpus_is_deterministic_and_inner(seed in any::<u64>(), count in 1usize..6, dim in 1usize..3) {
        let cfg = CorpusConfig { seed, count, families: Family::ALL.to_vec(), spline_degree: 2 };
        let a = gen_corpus(dim, 2.0, &cfg).unwrap();
        let b = gen_corpus(dim, 2.0, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        let level = if dim == 1 { 6 } else { 4 };
        for (_, f) in a.sample(level).unwrap() {
            for (i, v) in f.values().iter().enumerate() {
                if f.point(i).iter().any(|x| x.abs() > 1.0) {
                    prop_assert_eq!(*v, 0.0);
                }
            }
        }
    }
}
