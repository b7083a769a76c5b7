mod common;

use common::oracles::*;
use fric::ncdist::{
    central_f_cdf, chi2_cdf, invert_ncp, noncentral_f_cdf, noncentral_t_cdf, NCP_CAP,
};
use fric::DistError;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

#[test]
fn chi2_matches_quadrature() {
    for &(x, m) in &[(4.3, 7u32), (0.2, 3), (12.0, 10), (55.0, 40)] {
        let oracle = simpson(|w| chi2_density(w, m as f64), 0.0, x, 200_000);
        let oracle = if m == 3 {
            // the density has an infinite slope at zero; integrate in √w
            simpson(|u| 2.0 * u * chi2_density(u * u, 3.0), 0.0, x.sqrt(), 20_000)
        } else {
            oracle
        };
        let got = chi2_cdf(x, m);
        assert!((got - oracle).abs() < 1e-10, "chi2({x}; {m}) = {got}, oracle {oracle}");
    }
}

#[test]
fn central_f_matches_statrs() {
    for &(d1, d2) in &[(1u32, 3u32), (1, 183), (2, 10), (5, 5), (4, 36)] {
        let law = FisherSnedecor::new(d1 as f64, d2 as f64).unwrap();
        for &x in &[0.05, 0.5, 1.0, 2.0, 7.5, 30.0] {
            let got = central_f_cdf(x, d1, d2);
            let want = law.cdf(x);
            assert!((got - want).abs() < 1e-10, "F({x}; {d1}, {d2}) = {got}, statrs {want}");
            assert_eq!(noncentral_f_cdf(x, d1, d2, 0.0).unwrap(), got);
        }
    }
}

#[test]
fn noncentral_f_one_df_matches_quadrature() {
    for &m in &[3u32, 10, 40, 183] {
        for &x in &[0.3, 1.0, 2.5, 7.0] {
            for &lam in &[0.0, 0.5, 4.0, 25.0] {
                let got = noncentral_f_cdf(x, 1, m, lam).unwrap();
                let want = ncf1_oracle(x, m, lam);
                assert!(
                    (got - want).abs() < 1e-8,
                    "F_1,{m}({x}; {lam}) = {got}, quadrature {want}"
                );
            }
        }
    }
}

#[test]
fn noncentral_f_two_df_matches_quadrature() {
    for &m in &[5u32, 36] {
        for &x in &[0.4, 1.5, 5.0] {
            for &lam in &[0.7, 9.0] {
                let got = noncentral_f_cdf(x, 2, m, lam).unwrap();
                let want = ncf2_oracle(x, m, lam);
                assert!(
                    (got - want).abs() < 1e-8,
                    "F_2,{m}({x}; {lam}) = {got}, quadrature {want}"
                );
            }
        }
    }
}

#[test]
fn noncentral_f_matches_monte_carlo() {
    let (d1, m, lam) = (3u32, 12u32, 5.0f64);
    let xs = [0.5, 1.5, 3.0, 6.0];
    let draws = 10_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let denom = ChiSquared::new(m as f64).unwrap();
    let rest = ChiSquared::new((d1 - 1) as f64).unwrap();
    let delta = lam.sqrt();
    let mut hits = [0usize; 4];
    for _ in 0..draws {
        let z: f64 = StandardNormal.sample(&mut rng);
        let num = (z + delta).powi(2) + rest.sample(&mut rng);
        let f = (num / d1 as f64) / (denom.sample(&mut rng) / m as f64);
        for (h, &x) in hits.iter_mut().zip(&xs) {
            if f <= x {
                *h += 1;
            }
        }
    }
    for (h, &x) in hits.iter().zip(&xs) {
        let p_hat = *h as f64 / draws as f64;
        let se = (p_hat * (1.0 - p_hat) / draws as f64).sqrt();
        let got = noncentral_f_cdf(x, d1, m, lam).unwrap();
        assert!((got - p_hat).abs() < 3.0 * se, "x = {x}: {got} vs MC {p_hat} ± {se}");
    }
}

#[test]
fn noncentral_t_matches_monte_carlo() {
    let (m, delta) = (8u32, 1.7f64);
    let xs = [-0.5, 1.0, 2.0, 4.0];
    let draws = 10_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let denom = ChiSquared::new(m as f64).unwrap();
    let mut hits = [0usize; 4];
    for _ in 0..draws {
        let z: f64 = StandardNormal.sample(&mut rng);
        let t = (z + delta) / (denom.sample(&mut rng) / m as f64).sqrt();
        for (h, &x) in hits.iter_mut().zip(&xs) {
            if t <= x {
                *h += 1;
            }
        }
    }
    for (h, &x) in hits.iter().zip(&xs) {
        let p_hat = *h as f64 / draws as f64;
        let se = (p_hat * (1.0 - p_hat) / draws as f64).sqrt();
        let got = noncentral_t_cdf(x, m, delta).unwrap();
        assert!((got - p_hat).abs() < 3.0 * se, "x = {x}: {got} vs MC {p_hat} ± {se}");
    }
}

#[test]
fn noncentral_t_matches_quadrature() {
    // P(T <= x) = E_W[Φ(x √(W/m) - δ)]
    for &(x, m, delta) in &[(1.3, 25u32, 0.8), (-0.7, 5, 1.5), (3.0, 12, 2.5), (0.0, 40, -1.0)] {
        let want = chi2_expectation(m, |w| phi(x * (w / m as f64).sqrt() - delta));
        let got = noncentral_t_cdf(x, m, delta).unwrap();
        assert!((got - want).abs() < 1e-8, "t_{m}({x}; {delta}) = {got}, quadrature {want}");
    }
}

#[test]
fn t_and_f_agree() {
    let (s, delta, m) = (1.3f64, 0.8f64, 25u32);
    let two_sided = noncentral_t_cdf(s, m, delta).unwrap() - noncentral_t_cdf(-s, m, delta).unwrap();
    let f = noncentral_f_cdf(s * s, 1, m, delta * delta).unwrap();
    assert!((two_sided - f).abs() < 1e-9, "{two_sided} vs {f}");
}

#[test]
fn huge_noncentrality_leaves_no_mass_below() {
    let c = noncentral_f_cdf(50.0, 1, 20, NCP_CAP).unwrap();
    assert!(c < 1e-12, "{c}");
    assert!(matches!(
        noncentral_f_cdf(50.0, 1, 20, 2.0 * NCP_CAP),
        Err(DistError::NcpTooLarge(_))
    ));
}

#[test]
fn invalid_parameters_rejected() {
    assert!(noncentral_f_cdf(1.0, 0, 5, 1.0).is_err());
    assert!(noncentral_f_cdf(1.0, 1, 5, -1.0).is_err());
    assert!(noncentral_f_cdf(f64::NAN, 1, 5, 1.0).is_err());
    assert!(invert_ncp(0.5, 0.0, 1, 5).is_err());
}

#[test]
fn invert_ncp_round_trip_lattice() {
    for &d1 in &[1u32, 3] {
        for &m in &[3u32, 20, 183] {
            for &x in &[0.5, 2.0, 8.0, 30.0] {
                for &ncp in &[0.01, 0.3, 1.0, 4.0, 15.0, 60.0] {
                    let target = noncentral_f_cdf(x, d1, m, ncp).unwrap();
                    if !(1e-6..=1.0 - 1e-6).contains(&target) {
                        continue;
                    }
                    let back = invert_ncp(target, x, d1, m).unwrap();
                    assert!(
                        (back - ncp).abs() <= 1e-7 * ncp.max(1.0),
                        "d1={d1} m={m} x={x} ncp={ncp}: got {back}"
                    );
                    assert!(noncentral_f_cdf(x, d1, m, back).unwrap() <= target);
                }
            }
        }
    }
}

#[test]
fn invert_ncp_matches_grid_search() {
    let (x, d1, m, target) = (3.2, 1u32, 15u32, 0.25);
    // bracket on a coarse grid, then bisect
    let f = |ncp: f64| noncentral_f_cdf(x, d1, m, ncp).unwrap() - target;
    let grid: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.01).collect();
    let k = grid.windows(2).position(|w| f(w[0]) > 0.0 && f(w[1]) <= 0.0).unwrap();
    let (mut lo, mut hi) = (grid[k], grid[k + 1]);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let got = invert_ncp(target, x, d1, m).unwrap();
    assert!((got - hi).abs() < 1e-8, "{got} vs {hi}");
}

#[test]
fn invert_ncp_out_of_range() {
    let central = central_f_cdf(2.0, 1, 10);
    assert!(matches!(
        invert_ncp(central + 0.01, 2.0, 1, 10),
        Err(DistError::OutOfRange { .. })
    ));
    assert_eq!(invert_ncp(central, 2.0, 1, 10).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn cdf_decreasing_in_ncp(x in 0.01f64..50.0, d1 in 1u32..6, m in 3u32..200, a in 0.0f64..200.0, b in 0.0f64..200.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let c_lo = noncentral_f_cdf(x, d1, m, lo).unwrap();
        let c_hi = noncentral_f_cdf(x, d1, m, hi).unwrap();
        prop_assert!(c_hi <= c_lo + 1e-12);
        prop_assert!((0.0..=1.0).contains(&c_lo));
    }

    #[test]
    fn cdf_increasing_in_x(a in 0.0f64..50.0, b in 0.0f64..50.0, d1 in 1u32..6, m in 3u32..200, ncp in 0.0f64..100.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let c_lo = noncentral_f_cdf(lo, d1, m, ncp).unwrap();
        let c_hi = noncentral_f_cdf(hi, d1, m, ncp).unwrap();
        prop_assert!(c_lo <= c_hi + 1e-12);
    }
}
