mod common;

use proptest::prelude::*;
use sdgattack::metrics::{
    kl_divergence_categorical, kl_divergence_continuous, ks_statistic, percent_change,
    wasserstein_1d,
};

/// Integral of |F_a - F_b| over the union of sample points, with both CDFs
/// evaluated by counting.
fn brute_w1(a: &[f64], b: &[f64]) -> f64 {
    let mut xs: Vec<f64> = a.iter().chain(b).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let cdf = |v: &[f64], x: f64| v.iter().filter(|&&y| y <= x).count() as f64 / v.len() as f64;
    xs.windows(2)
        .map(|w| (cdf(a, w[0]) - cdf(b, w[0])).abs() * (w[1] - w[0]))
        .sum()
}

fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |v: &[f64], x: f64| v.iter().filter(|&&y| y <= x).count() as f64 / v.len() as f64;
    a.iter()
        .chain(b)
        .map(|&x| (cdf(a, x) - cdf(b, x)).abs())
        .fold(0.0, f64::max)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..50)
}

/// Samples with repeated values, to exercise ties.
fn tied_sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-5i32..5).prop_map(f64::from), 1..50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distances_are_symmetric(a in sample(), b in sample()) {
        prop_assert_eq!(wasserstein_1d(&a, &b).unwrap(), wasserstein_1d(&b, &a).unwrap());
        prop_assert_eq!(ks_statistic(&a, &b).unwrap(), ks_statistic(&b, &a).unwrap());
    }

    #[test]
    fn distances_match_brute_force(a in sample(), b in sample()) {
        prop_assert!((wasserstein_1d(&a, &b).unwrap() - brute_w1(&a, &b)).abs() <= 1e-12);
        prop_assert!((ks_statistic(&a, &b).unwrap() - brute_ks(&a, &b)).abs() <= 1e-12);
    }

    #[test]
    fn distances_match_brute_force_with_ties(a in tied_sample(), b in tied_sample()) {
        prop_assert!((wasserstein_1d(&a, &b).unwrap() - brute_w1(&a, &b)).abs() <= 1e-12);
        prop_assert!((ks_statistic(&a, &b).unwrap() - brute_ks(&a, &b)).abs() <= 1e-12);
    }

    #[test]
    fn w1_scale_covariance(a in sample(), b in sample(), s in -8.0f64..8.0, k in -4i32..4) {
        let base = wasserstein_1d(&a, &b).unwrap();
        let scaled = |v: &[f64], f: f64| v.iter().map(|x| f * x).collect::<Vec<_>>();
        let w = wasserstein_1d(&scaled(&a, s), &scaled(&b, s)).unwrap();
        prop_assert!((w - s.abs() * base).abs() <= 1e-12 * (1.0 + s.abs() * base));
        // powers of two scale every term exactly
        let p = 2f64.powi(k);
        prop_assert_eq!(wasserstein_1d(&scaled(&a, p), &scaled(&b, p)).unwrap(), p * base);
    }

    #[test]
    fn w1_translation_invariance(a in sample(), b in sample(), c in -50.0f64..50.0) {
        let shift = |v: &[f64]| v.iter().map(|x| x + c).collect::<Vec<_>>();
        let base = wasserstein_1d(&a, &b).unwrap();
        let w = wasserstein_1d(&shift(&a), &shift(&b)).unwrap();
        prop_assert!((w - base).abs() <= 1e-11 * (1.0 + c.abs()));
    }

    #[test]
    fn w1_bounded_below_by_mean_gap(a in sample(), b in sample()) {
        let gap = (mean(&a) - mean(&b)).abs();
        prop_assert!(wasserstein_1d(&a, &b).unwrap() >= gap - 1e-12);
    }

    #[test]
    fn ks_invariant_under_monotone_maps(a in sample(), b in sample(), s in 0.1f64..5.0, c in -5.0f64..5.0) {
        let base = ks_statistic(&a, &b).unwrap();
        let exp = |v: &[f64]| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
        let affine = |v: &[f64]| v.iter().map(|x| s * x + c).collect::<Vec<_>>();
        let decreasing = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        prop_assert_eq!(ks_statistic(&exp(&a), &exp(&b)).unwrap(), base);
        prop_assert_eq!(ks_statistic(&affine(&a), &affine(&b)).unwrap(), base);
        // a decreasing map reflects both CDFs; the sup gap over the union is unchanged
        prop_assert_eq!(ks_statistic(&decreasing(&a), &decreasing(&b)).unwrap(), base);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn kl_non_negative_and_zero_on_self(a in sample(), b in sample(), bins in 2usize..40) {
        prop_assert!(kl_divergence_continuous(&a, &b, bins).unwrap() >= 0.0);
        prop_assert!(kl_divergence_continuous(&a, &a, bins).unwrap() <= 1e-8);
    }

    #[test]
    fn categorical_kl_zero_on_self(a in prop::collection::vec(0u32..5, 1..60), b in prop::collection::vec(0u32..5, 1..60)) {
        prop_assert_eq!(kl_divergence_categorical(&a, &a, 5).unwrap(), 0.0);
        prop_assert!(kl_divergence_categorical(&a, &b, 5).unwrap() >= 0.0);
    }

    #[test]
    fn percent_change_inverts(base in 0.01f64..100.0, attacked in -100.0f64..100.0) {
        let pc = percent_change(base, attacked).unwrap();
        prop_assert!((base * (1.0 + pc / 100.0) - attacked).abs() <= 1e-9 * (1.0 + attacked.abs()));
    }
}

#[test]
fn kl_has_an_asymmetric_witness() {
    let a = [0u32, 0, 0, 1];
    let b = [0u32, 1, 1, 1];
    let c = [0u32, 0, 0, 0, 0, 0, 0, 1];
    assert_ne!(
        kl_divergence_categorical(&a, &c, 2).unwrap(),
        kl_divergence_categorical(&c, &a, 2).unwrap()
    );
    // a mirror pair is symmetric, so asymmetry is not an artifact of sizes
    assert!(
        (kl_divergence_categorical(&a, &b, 2).unwrap()
            - kl_divergence_categorical(&b, &a, 2).unwrap())
        .abs()
            < 1e-12
    );
}

#[test]
fn empty_samples_rejected() {
    assert!(wasserstein_1d(&[], &[1.0]).is_err());
    assert!(ks_statistic(&[1.0], &[]).is_err());
    assert!(kl_divergence_continuous(&[], &[1.0], 10).is_err());
}
