mod common;

use approx::assert_abs_diff_eq;
use sc231::enumerate::exhaustive_summary;
use sc231::sample::{confidence_interval, random_perm, sample_stats, t_quantile, RngState};

/// `(prob, df, quantile)` computed once with `common::t_quantile_oracle`.
const T_TABLE: [(f64, u64, f64); 6] = [
    (0.995, 399, 2.5882071640),
    (0.995, 10_000_000, 2.5758297952),
    (0.975, 10, 2.2281388520),
    (0.9, 2, 1.8856180832),
    (0.995, 999, 2.5807596373),
    (0.995, 4, 4.6040948713),
];

#[test]
fn frozen_quantiles_still_match_the_oracle() {
    for (p, df, q) in T_TABLE.iter().take(4) {
        assert_abs_diff_eq!(common::t_quantile_oracle(*p, *df as f64), q, epsilon = 1e-8);
    }
}

#[test]
fn t_quantile_accuracy() {
    for (p, df, q) in T_TABLE {
        assert_abs_diff_eq!(t_quantile(p, df).unwrap(), q, epsilon = 1e-6);
        assert_abs_diff_eq!(t_quantile(1.0 - p, df).unwrap(), -q, epsilon = 1e-6);
    }
    // Cauchy: tan(pi (p - 1/2))
    assert_abs_diff_eq!(t_quantile(0.75, 1).unwrap(), 1.0, epsilon = 1e-9);
    for df in [1, 3, 30, 400] {
        assert_eq!(t_quantile(0.5, df).unwrap(), 0.0);
    }
}

#[test]
fn interval_for_unit_sd() {
    let (lo, hi) = confidence_interval(0.0, 1.0, 400, 0.99).unwrap();
    assert_abs_diff_eq!(lo, -0.12941, epsilon = 1e-4);
    assert_abs_diff_eq!(hi, 0.12941, epsilon = 1e-4);
    assert_abs_diff_eq!(hi, 2.5882071640 / 20.0, epsilon = 1e-9);
}

#[test]
fn reference_intervals_are_centred_on_their_means() {
    // (n, mean, lower, upper); bounds carry 8 significant digits
    let rows = [
        (15, 11.465, 11.055417, 11.874583),
        (25, 24.5025, 23.870502, 25.134498),
        (50, 69.3925, 68.150269, 70.634731),
        (100, 195.1575, 192.79904, 197.51596),
        (200, 541.89, 537.73894, 546.04106),
        (300, 964.975, 959.12593, 970.82407),
        (400, 1444.46, 1436.5756, 1452.3444),
        (500, 1954.0025, 1944.4278, 1963.5772),
        (600, 2496.2875, 2485.2875, 2507.2875),
        (700, 3071.16, 3058.5745, 3083.7455),
        (800, 3676.2975, 3662.5979, 3689.9971),
        (900, 4291.2775, 4276.211, 4306.344),
        (1000, 4920.8125, 4904.9479, 4936.6771),
    ];
    for (n, mean, lo, hi) in rows {
        let mid: f64 = (lo + hi) / 2.0;
        assert!((mid - mean).abs() <= 1e-4, "n={n}: midpoint {mid} vs {mean}");
        // the implied sample sd from a 400-sample 99% interval is positive and finite
        let sd = (hi - lo) / 2.0 / 2.5882071640 * 20.0;
        assert!(sd > 0.0 && sd.is_finite());
    }
}

#[test]
fn stats_invariants() {
    for n in [3, 7, 12, 30] {
        for seed in 0..5 {
            let s = sample_stats(n, 60, seed, 0.99, 2).unwrap().stats;
            assert!(s.ci_low <= s.mean && s.mean <= s.ci_high);
            let mid = (s.ci_low + s.ci_high) / 2.0;
            assert!((mid - s.mean).abs() <= 1e-9 * s.mean.abs().max(1.0));
            assert!(s.sd >= 0.0);
            assert_eq!(s.m, 60);
        }
    }
}

#[test]
fn exact_average_is_usually_covered() {
    // 99% intervals, 100 seeds, at a length small enough to know the exact average
    let exact = exhaustive_summary(8, 1).unwrap().summary.average;
    let covered = (0..100)
        .filter(|&seed| {
            let s = sample_stats(8, 400, seed, 0.99, 1).unwrap().stats;
            s.ci_low <= exact && exact <= s.ci_high
        })
        .count();
    assert!(covered >= 95, "covered {covered}/100");
}

#[test]
fn reports_are_reproducible() {
    let a = sample_stats(15, 400, 7, 0.99, 1).unwrap();
    let b = sample_stats(15, 400, 7, 0.99, 4).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn default_grid_means_increase() {
    let grid = [15, 25, 50, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000];
    let means: Vec<f64> = grid
        .iter()
        .map(|&n| sample_stats(n, 400, 0, 0.99, 1).unwrap().stats.mean)
        .collect();
    assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
}

#[test]
fn per_sample_streams_are_independent_of_order() {
    let forward: Vec<_> = (0..10)
        .map(|i| random_perm(12, &mut RngState::for_sample(3, 12, i).rng()).unwrap())
        .collect();
    let backward: Vec<_> = (0..10)
        .rev()
        .map(|i| random_perm(12, &mut RngState::for_sample(3, 12, i).rng()).unwrap())
        .collect();
    assert!(forward.iter().eq(backward.iter().rev()));
    let run = sample_stats(12, 10, 3, 0.99, 1).unwrap();
    let direct: Vec<u32> = forward
        .iter()
        .map(|p| sc231::perm::sort_number(p).unwrap().sort_number)
        .collect();
    assert_eq!(run.sort_numbers, direct);
}
