use fric::mc::{
    coverage_checks, perturbed_cdf, random_design, simulate_replicates, CoverageTarget, Replicate,
    SampleCollector, SimConfig, StatsCollector,
};
use fric::{confidence_distribution, focus_geometry, subset_geometry, Error, FocusVector, Subset};
use nalgebra::DVector;

fn scenario() -> (SimConfig, Subset, FocusVector) {
    let design = random_design(40, 4, 3).unwrap();
    let beta = DVector::from_vec(vec![1.0, 0.3, -0.2, 0.15]);
    let cfg = SimConfig::new(design, beta, 1.0, 2_000, 17);
    (cfg, Subset::from_indices(&[0, 1], 4), FocusVector::new(vec![1.0, 0.5, -1.0, 1.2], 4).unwrap())
}

fn c_values(cfg: &SimConfig, s: &Subset, x0: &FocusVector, rr: f64) -> Vec<f64> {
    let collector = SampleCollector::new(1, |rep: &Replicate<'_>| {
        let g = subset_geometry(rep.fit, rep.data, s)?;
        let cd = confidence_distribution(&focus_geometry(rep.fit, &g, x0)?, rep.fit.m);
        Ok(vec![cd.evaluate(rr.max(cd.rr_min))])
    });
    simulate_replicates(cfg, &collector).unwrap().remove(0)
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let (cfg, s, x0) = scenario();
    let a = c_values(&cfg, &s, &x0, 1.0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| c_values(&cfg, &s, &x0, 1.0));
    assert_eq!(a, b);
    let stats = StatsCollector::new(1, |rep: &Replicate<'_>| Ok(vec![rep.fit.sigma2_hat]));
    let m1 = simulate_replicates(&cfg, &stats).unwrap();
    let m2 = pool.install(|| simulate_replicates(&cfg, &stats).unwrap());
    assert_eq!(m1, m2);
}

#[test]
fn replicate_minimum_enforced() {
    let (mut cfg, _, _) = scenario();
    cfg.replicates = 10;
    let stats = StatsCollector::new(1, |_: &Replicate<'_>| Ok(vec![0.0]));
    assert!(matches!(simulate_replicates(&cfg, &stats), Err(Error::InvalidConfig(_))));
}

fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn confidence_values_are_pivotal() {
    let (mut cfg, s, x0) = scenario();
    cfg.replicates = 10_000;
    let rr = fric::mc::true_risk(&cfg.design, &s, &x0, &cfg.beta, cfg.sigma).unwrap().rr_true;
    let a = c_values(&cfg, &s, &x0, rr);
    let mut doubled = cfg.clone();
    doubled.sigma *= 2.0;
    doubled.beta *= 2.0;
    doubled.seed = 1_234_567;
    let rr2 = fric::mc::true_risk(&doubled.design, &s, &x0, &doubled.beta, doubled.sigma).unwrap().rr_true;
    assert!((rr - rr2).abs() < 1e-12);
    let b = c_values(&doubled, &s, &x0, rr2);
    let critical = 1.628 * (2.0 / 10_000.0f64).sqrt();
    let d = ks_distance(a, b);
    assert!(d <= critical, "KS distance {d} above {critical}");
}

#[test]
fn perturbed_cdf_breaks_coverage() {
    let (mut cfg, s, x0) = scenario();
    cfg.replicates = 5_000;
    let exact = coverage_checks(&cfg, &[s], &x0, CoverageTarget::Focused, 0.03, &fric::ncdist::noncentral_f_cdf)
        .unwrap();
    assert!(exact.iter().all(|c| c.pass));
    let biased = coverage_checks(&cfg, &[s], &x0, CoverageTarget::Focused, 0.012, &perturbed_cdf(0.04)).unwrap();
    assert!(biased.iter().any(|c| !c.pass));
}

#[test]
fn heteroscedastic_knob_is_validated() {
    let (mut cfg, _, _) = scenario();
    cfg.error_scale = Some(vec![1.0; 3]);
    assert!(cfg.validate().is_err());
    cfg.error_scale = Some((0..40).map(|i| 1.0 + i as f64 / 40.0).collect());
    assert!(cfg.validate().is_ok());
}

// E[(m-2)/m (κ̂² - 1)] = κ² + 2/m, so FRIC^u sits (2/m) wQw/v_wide above rr_true
// and AFRIC^u (equal weights) sits 2(p - |S|)/(m p) above it.
#[test]
fn unbiased_scores_carry_a_two_over_m_offset() {
    use fric::afric::{afric_scores, ensemble_geometry};
    use fric::mc::{true_risk, true_risk_ensemble};
    use fric::{fit_wide, fric_scores, FocusEnsemble};

    let (mut cfg, s, x0) = scenario();
    cfg.replicates = 100_000;
    let fit = fit_wide(&cfg.design).unwrap();
    let fg = focus_geometry(&fit, &subset_geometry(&fit, &cfg.design, &s).unwrap(), &x0).unwrap();
    let m = fit.m as f64;
    let (p, size) = (cfg.design.p() as f64, s.size() as f64);
    let rr = true_risk(&cfg.design, &s, &x0, &cfg.beta, cfg.sigma).unwrap().rr_true;
    let ens = FocusEnsemble::all_rows_equal(&cfg.design);
    let rr_star = true_risk_ensemble(&cfg.design, &s, &ens, &cfg.beta, cfg.sigma).unwrap().rr_true;

    let stats = StatsCollector::new(3, |rep: &Replicate<'_>| {
        let g = subset_geometry(rep.fit, rep.data, &s)?;
        let f = focus_geometry(rep.fit, &g, &x0)?;
        let mf = rep.fit.m as f64;
        let alt = (f.v_sub + f.wqw * ((mf - 2.0) / mf * f.kappa_hat.powi(2) - 1.0)) / f.v_wide;
        let eg = ensemble_geometry(rep.fit, &g, &FocusEnsemble::all_rows_equal(rep.data))?;
        Ok(vec![fric_scores(&f, rep.fit.m).unbiased, afric_scores(&eg, rep.fit.m).unbiased, alt])
    });
    let res = simulate_replicates(&cfg, &stats).unwrap();
    let within = |k: usize, target: f64| (res[k].mean - target).abs() <= 3.0 * res[k].std_error();

    let offset = 2.0 / m * fg.wqw / fg.v_wide;
    assert!(within(0, rr + offset), "{} vs {}", res[0].mean, rr + offset);
    assert!(!within(0, rr));
    let offset_star = 2.0 * (p - size) / (m * p);
    assert!(within(1, rr_star + offset_star), "{} vs {}", res[1].mean, rr_star + offset_star);
    assert!(within(2, rr), "{} vs {}", res[2].mean, rr);
}

// With σ̂² in place of σ², E[M_S] = |S| + γ_S + 2(p - |S| + γ_S)/(m - 2):
// the excess shrinks in m once γ_S is held fixed.
#[test]
fn estimated_variance_mallows_excess_shrinks() {
    use fric::classic::{classic_scores, mallows_population_mean, MallowsVariance};

    let p = 4;
    let s = Subset::from_indices(&[0, 2], p);
    let mut excess = Vec::new();
    for n in [30usize, 240] {
        let design = random_design(n, p, 21).unwrap();
        let shrink = (30.0 / n as f64).sqrt();
        let beta = DVector::from_vec(vec![1.0, 0.4 * shrink, 0.2, -0.3 * shrink]);
        let cfg = SimConfig::new(design, beta, 1.0, 40_000, 23 + n as u64);
        let target = mallows_population_mean(&cfg.design, &s, &cfg.beta, cfg.sigma).unwrap().via_gamma;
        let gamma = target - s.size() as f64;
        let stats = StatsCollector::new(1, |rep: &Replicate<'_>| {
            let g = subset_geometry(rep.fit, rep.data, &s)?;
            Ok(vec![classic_scores(rep.fit, &g, MallowsVariance::Unbiased).mallows])
        });
        let r = simulate_replicates(&cfg, &stats).unwrap()[0];
        let m = (n - p) as f64;
        let predicted = 2.0 * ((p - s.size()) as f64 + gamma) / (m - 2.0);
        let observed = r.mean - target;
        assert!((observed - predicted).abs() <= 3.0 * r.std_error(), "n={n}: {observed} vs {predicted}");
        excess.push((observed, r.std_error()));
    }
    assert!(excess[0].0 - excess[1].0 > 3.0 * (excess[0].1.hypot(excess[1].1)), "{excess:?}");
}
