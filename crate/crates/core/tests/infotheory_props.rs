mod common;

use common::{oracle_co_information, oracle_entropy, oracle_joint, oracle_mi, scripted};
use infoplan::infotheory::{
    co_information, entropy, joint_entropy, mutual_information, sliding_series, subset_information, trend_sign,
    QuantizationGrid, Selector, Statistic, TimeSeries, Trend,
};
use infoplan::signal_io::{ElementId, PipelineConfig};
use proptest::prelude::*;

const Q: f64 = 0.01;

fn grid() -> QuantizationGrid {
    QuantizationGrid::new(Q, 0.0).unwrap()
}

/// 40 samples placed well inside their bins, so exact-multiple shifts
/// cannot push a value across an edge through rounding.
fn samples(max_bin: i64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-max_bin..=max_bin, 0.2f64..0.8), 40)
        .prop_map(|v| v.into_iter().map(|(b, f)| (b as f64 + f) * Q).collect())
}

proptest! {
    #[test]
    fn entropy_matches_oracle_and_bounds(x in samples(6)) {
        let h = entropy(&x, &grid()).unwrap();
        prop_assert!((h - oracle_entropy(&x, Q)).abs() < 1e-9);
        prop_assert!(h >= 0.0 && h <= (x.len() as f64).log2() + 1e-12);
        let one_bin = x.iter().all(|v| (v / Q).floor() == (x[0] / Q).floor());
        prop_assert_eq!(h == 0.0, one_bin);
    }

    #[test]
    fn mi_symmetry_floor_and_oracle(x in samples(5), y in samples(5)) {
        let g = grid();
        let xy = mutual_information(&x, &y, &g).unwrap();
        let yx = mutual_information(&y, &x, &g).unwrap();
        prop_assert_eq!(xy.to_bits(), yx.to_bits());
        prop_assert!(xy >= 0.0);
        prop_assert!((xy - oracle_mi(&x, &y, Q)).abs() < 1e-9);
    }

    #[test]
    fn self_information(x in samples(8)) {
        let g = grid();
        prop_assert!((mutual_information(&x, &x, &g).unwrap() - entropy(&x, &g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn joint_entropy_bounds(x in samples(4), y in samples(4)) {
        let g = grid();
        let (hx, hy) = (entropy(&x, &g).unwrap(), entropy(&y, &g).unwrap());
        let hxy = joint_entropy(&x, &y, &g).unwrap();
        prop_assert!((hxy - oracle_joint(&[&x, &y], Q)).abs() < 1e-9);
        prop_assert!(hx.max(hy) - 1e-9 <= hxy && hxy <= hx + hy + 1e-9);
    }

    #[test]
    fn grid_translation_invariance(x in samples(5), y in samples(5), k in -300i64..300) {
        let g = grid();
        let shift = |v: &[f64]| v.iter().map(|s| s + k as f64 * Q).collect::<Vec<_>>();
        let (sx, sy) = (shift(&x), shift(&y));
        prop_assert!((entropy(&sx, &g).unwrap() - entropy(&x, &g).unwrap()).abs() < 1e-12);
        prop_assert!((mutual_information(&sx, &sy, &g).unwrap() - mutual_information(&x, &y, &g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn co_information_matches_subset_oracle(x in samples(3), y in samples(3), z in samples(3)) {
        let ci = co_information(&[&x, &y, &z], &grid()).unwrap();
        prop_assert!((ci - oracle_co_information(&[&x, &y, &z], Q)).abs() < 1e-9);
    }

    #[test]
    fn constant_member_zeroes_co_information(x in samples(4), y in samples(4)) {
        let c = vec![0.5 * Q; 40];
        prop_assert!(co_information(&[&x, &y, &c], &grid()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_signal_subset_sum_is_mi(x in samples(4), y in samples(4)) {
        let g = grid();
        let two = subset_information(&[&x, &y], &g).unwrap();
        prop_assert!((two - mutual_information(&x, &y, &g).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn worked_entropy_values() {
    let g = grid();
    assert_eq!(entropy(&[0.123; 40], &g).unwrap(), 0.0);
    let two: Vec<f64> = (0..40).map(|i| (i % 2) as f64 * Q + 0.5 * Q).collect();
    assert!((entropy(&two, &g).unwrap() - 1.0).abs() < 1e-12);
    let four: Vec<f64> = (0..40).map(|i| (i % 4) as f64 * Q + 0.5 * Q).collect();
    assert!((entropy(&four, &g).unwrap() - 2.0).abs() < 1e-12);
    let x: Vec<f64> = (0..40).map(|i| (i % 7) as f64 * Q + 0.3 * Q).collect();
    assert!((mutual_information(&[0.2; 40], &x, &g).unwrap()).abs() < 1e-15);
    assert!((co_information(&[&x, &x, &x], &g).unwrap() - entropy(&x, &g).unwrap()).abs() < 1e-12);
}

#[test]
fn trend_counts_majority() {
    let series = |v: Vec<f64>| TimeSeries {
        start_frame: 0,
        values: v.into_iter().map(Some).collect(),
    };
    let ramp = series((0..25).map(|i| -(i as f64)).collect());
    assert_eq!(trend_sign(&ramp, 24, 20).unwrap(), Trend::Negative);
    assert_eq!(trend_sign(&series(vec![1.0; 25]), 24, 20).unwrap(), Trend::NonNegative);
    // 11 decreasing steps, then 9 increasing.
    let mut v = vec![20.0];
    for i in 0..20 {
        let last = *v.last().unwrap();
        v.push(if i < 11 { last - 1.0 } else { last + 0.5 });
    }
    assert_eq!(trend_sign(&series(v), 20, 20).unwrap(), Trend::Negative);
}

/// With a cycle that tiles the window exactly, every full window holds the
/// same bin histogram, so the sliding entropy is flat.
#[test]
fn periodic_signal_has_flat_sliding_entropy() {
    let config = PipelineConfig {
        window_samples: 44,
        trend_horizon: 22,
        ..PipelineConfig::default()
    };
    for period in [3usize, 5, 9, 15] {
        let f = move |k: usize| {
            [
                0.3 + 0.03 * ((k % period) as f64 / period as f64 * std::f64::consts::TAU).sin(),
                0.1,
                0.0,
            ]
        };
        let still = |_: usize| [1.0, 1.0, 0.0];
        let r = scripted(200, &[("hand", &still), ("spoon", &f)]);
        let s = sliding_series(
            &r,
            &Selector::Element(ElementId::from("spoon")),
            Statistic::Entropy,
            &config,
        )
        .unwrap();
        let first = s.values[0].unwrap();
        assert!(first > 0.0);
        assert!(
            s.values.iter().all(|v| (v.unwrap() - first).abs() < 1e-12),
            "period {period}"
        );
    }
}
