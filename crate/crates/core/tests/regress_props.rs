mod common;

use common::*;
use fric::regress::{enumerate_subsets_limited, hat_matrix};
use fric::{enumerate_subsets, fit_wide, subset_geometry, Dataset, Error, Subset};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn beta_matches_normal_equations() {
    let mut r = rng(11);
    let data = random_dataset(&mut r, 50, 4);
    let fit = fit_wide(&data).unwrap();
    let xtx = data.x().tr_mul(data.x());
    let xty = data.x().tr_mul(data.y());
    let direct = xtx.cholesky().unwrap().solve(&xty);
    for j in 0..4 {
        assert!((fit.beta_hat[j] - direct[j]).abs() <= 1e-9 * direct[j].abs().max(1.0));
    }
    let resid = data.y() - data.x() * &fit.beta_hat;
    assert!((resid.norm_squared() - fit.rss_wide).abs() <= 1e-9 * fit.rss_wide);
    assert!((fit.sigma2_hat * fit.m as f64 - fit.rss_wide).abs() <= 1e-12 * fit.rss_wide);
    let prod = &fit.sigma_n * &fit.sigma_n_inv;
    assert!(max_abs(&(prod - DMatrix::identity(4, 4))) <= 1e-10);
}

#[test]
fn intercept_only_estimate_is_mean() {
    let mut r = rng(12);
    let data = random_dataset(&mut r, 40, 3);
    let fit = fit_wide(&data).unwrap();
    let g = subset_geometry(&fit, &data, &Subset::from_indices(&[0], 3)).unwrap();
    assert!((g.beta_hat[0] - data.y().mean()).abs() < 1e-12);
}

#[test]
fn hat_matrix_is_projection() {
    let mut r = rng(13);
    for _ in 0..20 {
        let data = random_dataset(&mut r, 30, 5);
        let s = random_subset(&mut r, 5);
        let h = hat_matrix(&data, &s).unwrap();
        assert!((h.trace() - s.size() as f64).abs() <= 1e-9);
        assert!(max_abs(&(&h * &h - &h)) <= 1e-9);
    }
}

#[test]
fn hat_identity_on_fixed_subset() {
    let mut r = rng(14);
    let data = random_dataset(&mut r, 30, 5);
    let fit = fit_wide(&data).unwrap();
    let s = Subset::from_indices(&[0, 1], 5);
    let g = subset_geometry(&fit, &data, &s).unwrap();
    let h = hat_matrix(&data, &s).unwrap();
    let xo = data.x().select_columns(&s.excluded());
    let lhs = xo.tr_mul(&(&xo - &h * &xo)) / 30.0;
    assert!(max_abs(&(lhs - g.q.try_inverse().unwrap())) <= 1e-8);
}

#[test]
fn screening_predicate() {
    let mut r = rng(15);
    let data = random_dataset(&mut r, 60, 6);
    assert_eq!(enumerate_subsets(&data, None).unwrap().len(), 32);
    // x4 requires x5
    let screen = |s: &Subset| !s.contains(4) || s.contains(5);
    assert_eq!(enumerate_subsets(&data, Some(&screen)).unwrap().len(), 24);
}

#[test]
fn all_forced_gives_one_subset() {
    let mut r = rng(16);
    let data = random_dataset(&mut r, 30, 4).with_forced(vec![true; 4]).unwrap();
    let subsets = enumerate_subsets(&data, None).unwrap();
    assert_eq!(subsets, vec![Subset::full(4)]);
}

#[test]
fn subset_guardrail() {
    let mut r = rng(17);
    let data = random_dataset(&mut r, 30, 6);
    assert!(matches!(
        enumerate_subsets_limited(&data, None, 4),
        Err(Error::TooManySubsets { free: 5, limit: 4 })
    ));
}

#[test]
fn full_subset_matches_wide() {
    let mut r = rng(18);
    let data = random_dataset(&mut r, 30, 4);
    let fit = fit_wide(&data).unwrap();
    let g = subset_geometry(&fit, &data, &Subset::full(4)).unwrap();
    assert_eq!(g.q.nrows(), 0);
    assert!((g.rss - fit.rss_wide).abs() <= 1e-10 * fit.rss_wide);
}

#[test]
fn duplicate_column_rejected() {
    let n = 30;
    let mut x = DMatrix::from_element(n, 3, 1.0);
    for i in 0..n {
        x[(i, 1)] = i as f64;
        x[(i, 2)] = (i as f64).powi(2);
    }
    let y = DVector::from_fn(n, |i, _| (i as f64).sin());
    let names = vec!["intercept".into(), "a".into(), "b".into()];
    let data = Dataset::new(x.clone(), y.clone(), names.clone(), vec![true, false, false]).unwrap();
    assert!(fit_wide(&data).is_ok());
    let mut dup = x.clone();
    dup.set_column(2, &x.column(1).clone_owned());
    assert!(matches!(
        Dataset::new(dup, y, names, vec![true, false, false]),
        Err(Error::RankDeficient { .. })
    ));
}

#[test]
fn deterministic_outputs() {
    let mut r = rng(19);
    let data = random_dataset(&mut r, 45, 5);
    let a = fit_wide(&data).unwrap();
    let b = fit_wide(&data.clone()).unwrap();
    assert_eq!(a, b);
    let s = Subset::from_indices(&[0, 2, 3], 5);
    assert_eq!(subset_geometry(&a, &data, &s).unwrap(), subset_geometry(&b, &data, &s).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rss_monotone_in_nesting(seed in 0u64..10_000, extra in 1usize..5) {
        let mut r = rng(seed);
        let p = 6;
        let n = r.random_range(12..60);
        let data = random_dataset(&mut r, n, p);
        let fit = fit_wide(&data).unwrap();
        let small = random_proper_subset(&mut r, p);
        let mut mask = small.mask();
        for j in small.excluded().into_iter().take(extra) {
            mask[j] = true;
        }
        let big = Subset::from_mask(&mask);
        let rs = subset_geometry(&fit, &data, &small).unwrap().rss;
        let rb = subset_geometry(&fit, &data, &big).unwrap().rss;
        prop_assert!(rs >= rb - 1e-9 * rb.max(1.0));
        prop_assert!(rb >= fit.rss_wide - 1e-9 * fit.rss_wide.max(1.0));
    }

    #[test]
    fn block_identity(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let p = r.random_range(2..7);
        let n = r.random_range(p + 4..80);
        let data = random_dataset(&mut r, n, p);
        let fit = fit_wide(&data).unwrap();
        let s = random_proper_subset(&mut r, p);
        let g = subset_geometry(&fit, &data, &s).unwrap();
        let k = g.q.nrows();
        let prod = &g.q * g.schur_complement();
        prop_assert!(max_abs(&(prod - DMatrix::identity(k, k))) <= 1e-10);
    }
}
