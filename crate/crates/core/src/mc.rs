//! Simulation from the wide model at known truth.
//!
//! Replicate `r` of a run with seed `s` draws its errors from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `r`, so every
//! replicate is reproducible on its own and results do not depend on how
//! replicates are scheduled across threads. Normal variates come from the
//! inverse normal distribution function applied to 53-bit uniforms.
//!
//! Summaries are merged in chunk order, which keeps floating point sums
//! bit-identical between runs.

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::afric::{afric_confidence, afric_scores, ensemble_geometry, EnsembleKind, FocusEnsemble};
use crate::error::{DistError, Error, Result};
use crate::focus::{
    confidence_distribution, focus_geometry, fric_scores, FocusKind, FocusVector, DEGENERATE_TOL,
};
use crate::ncdist::{self, normal_quantile};
use crate::regress::{fit_wide, subset_geometry, Dataset, Subset, WideFit};

/// Smallest replicate count accepted by [`SimConfig`].
pub const MIN_REPLICATES: usize = 1_000;
const CHUNK: usize = 512;

/// Population quantities for one submodel and a single focus vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueRisk {
    /// `(v_sub + nλ²) / v_wide`
    pub rr_true: f64,
    /// `1 - (ωᵀQω / v_wide)(1 - κ²)`, the same quantity by a second route.
    pub rr_via_kappa: f64,
    pub rr_min: f64,
    pub kappa: f64,
    /// `ωᵀβ_{S^c} / σ`
    pub lambda: f64,
    /// `n λ²`
    pub big_lambda: f64,
    /// Equal-weights `γ_S = n β_{S^c}ᵀ Q_S⁻¹ β_{S^c} / σ²`.
    pub gamma: f64,
    /// `τ² = σ² ωᵀQω`
    pub tau2: f64,
}

struct Blocks {
    sigma_n: DMatrix<f64>,
    s00_inv: DMatrix<f64>,
    s01: DMatrix<f64>,
    q_inv: DMatrix<f64>,
    inside: Vec<usize>,
    outside: Vec<usize>,
}

fn blocks(data: &Dataset, subset: &Subset) -> Result<Blocks> {
    subset.check_forced(data)?;
    let n = data.n() as f64;
    let inside = subset.included();
    let outside = subset.excluded();
    let sigma_n = data.x().tr_mul(data.x()) / n;
    let s00 = sigma_n.select_rows(&inside).select_columns(&inside);
    let s01 = sigma_n.select_rows(&inside).select_columns(&outside);
    let s11 = sigma_n.select_rows(&outside).select_columns(&outside);
    let s00_inv = s00
        .lu()
        .try_inverse()
        .ok_or(Error::SingularSubmodel { key: subset.key(), rcond: 0.0 })?;
    let q_inv = &s11 - s01.tr_mul(&(&s00_inv * &s01));
    Ok(Blocks { sigma_n, s00_inv, s01, q_inv, inside, outside })
}

/// True relative risk and its ingredients at `(beta, sigma)`.
pub fn true_risk(
    data: &Dataset,
    subset: &Subset,
    x0: &FocusVector,
    beta: &DVector<f64>,
    sigma: f64,
) -> Result<TrueRisk> {
    let b = blocks(data, subset)?;
    let n = data.n() as f64;
    let x = x0.as_vector();
    let v_wide = x.dot(
        &b.sigma_n
            .clone()
            .lu()
            .solve(x)
            .ok_or(Error::RankDeficient { rcond: 0.0 })?,
    );
    let x_in = x.select_rows(&b.inside);
    let v_sub = x_in.dot(&(&b.s00_inv * &x_in));
    if b.outside.is_empty() {
        return Ok(TrueRisk {
            rr_true: 1.0,
            rr_via_kappa: 1.0,
            rr_min: 1.0,
            kappa: 0.0,
            lambda: 0.0,
            big_lambda: 0.0,
            gamma: 0.0,
            tau2: 0.0,
        });
    }
    let beta_out = beta.select_rows(&b.outside);
    let omega = b.s01.tr_mul(&(&b.s00_inv * &x_in)) - x.select_rows(&b.outside);
    let q = b
        .q_inv
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularSubmodel { key: subset.key(), rcond: 0.0 })?;
    let wqw = omega.dot(&(&q * &omega));
    let lambda = omega.dot(&beta_out) / sigma;
    let big_lambda = n * lambda * lambda;
    let kappa = if wqw > DEGENERATE_TOL * v_wide { n.sqrt() * lambda / wqw.sqrt() } else { 0.0 };
    let gamma = n * beta_out.dot(&(&b.q_inv * &beta_out)) / (sigma * sigma);
    Ok(TrueRisk {
        rr_true: (v_sub + big_lambda) / v_wide,
        rr_via_kappa: 1.0 - wqw / v_wide * (1.0 - kappa * kappa),
        rr_min: v_sub / v_wide,
        kappa,
        lambda,
        big_lambda,
        gamma,
        tau2: sigma * sigma * wqw,
    })
}

/// Population relative total risk over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleTrueRisk {
    /// Ratio of weighted risk sums, computed term by term.
    pub rr_true: f64,
    /// `n β_{S^c}ᵀ A_S β_{S^c} / σ²`
    pub gamma: f64,
    /// `(|S| + γ_S) / p`, equal-weights ensembles only.
    pub rr_closed_form: Option<f64>,
}

pub fn true_risk_ensemble(
    data: &Dataset,
    subset: &Subset,
    ens: &FocusEnsemble,
    beta: &DVector<f64>,
    sigma: f64,
) -> Result<EnsembleTrueRisk> {
    let b = blocks(data, subset)?;
    let n = data.n() as f64;
    let sigma_inv = b
        .sigma_n
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::RankDeficient { rcond: 0.0 })?;
    let beta_out = beta.select_rows(&b.outside);
    let proj = b.s01.tr_mul(&b.s00_inv);
    let (mut num, mut den, mut gamma) = (0.0, 0.0, 0.0);
    for (x, w) in ens.points() {
        let x_in = x.select_rows(&b.inside);
        let bias = if b.outside.is_empty() {
            0.0
        } else {
            (&proj * &x_in - x.select_rows(&b.outside)).dot(&beta_out)
        };
        let g = n * bias * bias / (sigma * sigma);
        num += w * (x_in.dot(&(&b.s00_inv * &x_in)) + g);
        den += w * x.dot(&(&sigma_inv * x));
        gamma += w * g;
    }
    let rr_closed_form = (ens.kind() == EnsembleKind::AllRowsEqual).then(|| {
        let g = if b.outside.is_empty() {
            0.0
        } else {
            n * beta_out.dot(&(&b.q_inv * &beta_out)) / (sigma * sigma)
        };
        (subset.size() as f64 + g) / data.p() as f64
    });
    Ok(EnsembleTrueRisk { rr_true: num / den, gamma, rr_closed_form })
}

/// Simulation settings. The design's own response is ignored.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub design: Dataset,
    pub beta: DVector<f64>,
    pub sigma: f64,
    pub replicates: usize,
    pub seed: u64,
    pub alpha_grid: Vec<f64>,
    /// Per-row multipliers of the error standard deviation. `None` means
    /// homoscedastic errors.
    pub error_scale: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn new(design: Dataset, beta: DVector<f64>, sigma: f64, replicates: usize, seed: u64) -> Self {
        Self {
            design,
            beta,
            sigma,
            replicates,
            seed,
            alpha_grid: default_alpha_grid(),
            error_scale: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::InvalidConfig(format!(
                "{} replicates is below the minimum of {MIN_REPLICATES}",
                self.replicates
            )));
        }
        if self.beta.len() != self.design.p() {
            return Err(Error::InvalidConfig("beta length does not match design".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig("sigma must be positive".into()));
        }
        if let Some(s) = &self.error_scale {
            if s.len() != self.design.n() || s.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::InvalidConfig("error_scale must hold n positive values".into()));
            }
        }
        if self.alpha_grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::InvalidConfig("alpha levels must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

pub fn default_alpha_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

/// Standard normal variate from a 64-bit word.
pub fn normal_from_bits(bits: u64) -> f64 {
    let u = ((bits >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    normal_quantile(u)
}

/// Generator for replicate `index` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One simulated dataset together with its wide fit.
pub struct Replicate<'a> {
    pub index: u64,
    pub data: &'a Dataset,
    pub fit: &'a WideFit,
}

/// Accumulates per-replicate statistics into a mergeable summary.
/// `merge` must be associative.
pub trait Collector: Sync {
    type Summary: Send;
    fn empty(&self) -> Self::Summary;
    fn observe(&self, acc: &mut Self::Summary, rep: &Replicate<'_>) -> Result<()>;
    fn merge(&self, a: Self::Summary, b: Self::Summary) -> Self::Summary;
}

/// Runs `cfg.replicates` replicates through `collector`.
pub fn simulate_replicates<C: Collector>(cfg: &SimConfig, collector: &C) -> Result<C::Summary> {
    cfg.validate()?;
    let mean = cfg.design.x() * &cfg.beta;
    let n = cfg.design.n();
    let chunks = cfg.replicates.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = collector.empty();
            let start = c * CHUNK;
            let end = (start + CHUNK).min(cfg.replicates);
            for r in start..end {
                let mut rng = replicate_rng(cfg.seed, r as u64);
                let y = DVector::from_fn(n, |i, _| {
                    let scale = cfg.error_scale.as_ref().map_or(1.0, |s| s[i]);
                    mean[i] + cfg.sigma * scale * normal_from_bits(rng.next_u64())
                });
                let data = cfg.design.with_response(y)?;
                let fit = fit_wide(&data)?;
                collector.observe(&mut acc, &Replicate { index: r as u64, data: &data, fit: &fit })?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts
        .into_iter()
        .reduce(|a, b| collector.merge(a, b))
        .unwrap_or_else(|| collector.empty()))
}

/// Mergeable running mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningStats {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / count as f64;
        Self { count, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Collects running statistics of a fixed-width vector of per-replicate
/// values.
pub struct StatsCollector<F> {
    width: usize,
    stat: F,
}

impl<F> StatsCollector<F>
where
    F: Fn(&Replicate<'_>) -> Result<Vec<f64>> + Sync,
{
    pub fn new(width: usize, stat: F) -> Self {
        Self { width, stat }
    }
}

impl<F> Collector for StatsCollector<F>
where
    F: Fn(&Replicate<'_>) -> Result<Vec<f64>> + Sync,
{
    type Summary = Vec<RunningStats>;

    fn empty(&self) -> Self::Summary {
        vec![RunningStats::default(); self.width]
    }

    fn observe(&self, acc: &mut Self::Summary, rep: &Replicate<'_>) -> Result<()> {
        let values = (self.stat)(rep)?;
        debug_assert_eq!(values.len(), self.width);
        for (s, v) in acc.iter_mut().zip(values) {
            s.push(v);
        }
        Ok(())
    }

    fn merge(&self, a: Self::Summary, b: Self::Summary) -> Self::Summary {
        a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()
    }
}

/// Keeps every per-replicate value, in replicate order.
pub struct SampleCollector<F> {
    width: usize,
    stat: F,
}

impl<F> SampleCollector<F>
where
    F: Fn(&Replicate<'_>) -> Result<Vec<f64>> + Sync,
{
    pub fn new(width: usize, stat: F) -> Self {
        Self { width, stat }
    }
}

impl<F> Collector for SampleCollector<F>
where
    F: Fn(&Replicate<'_>) -> Result<Vec<f64>> + Sync,
{
    type Summary = Vec<Vec<f64>>;

    fn empty(&self) -> Self::Summary {
        vec![Vec::new(); self.width]
    }

    fn observe(&self, acc: &mut Self::Summary, rep: &Replicate<'_>) -> Result<()> {
        for (s, v) in acc.iter_mut().zip((self.stat)(rep)?) {
            s.push(v);
        }
        Ok(())
    }

    fn merge(&self, mut a: Self::Summary, b: Self::Summary) -> Self::Summary {
        for (x, y) in a.iter_mut().zip(b) {
            x.extend(y);
        }
        a
    }
}

/// Noncentral F distribution function as used by the coverage checks.
pub type NcfCdf = dyn Fn(f64, u32, u32, f64) -> std::result::Result<f64, DistError> + Sync;

/// The production distribution function shifted up by `bias`, clamped to
/// `[0, 1]`. Used to check that coverage tests can fail.
pub fn perturbed_cdf(bias: f64) -> impl Fn(f64, u32, u32, f64) -> std::result::Result<f64, DistError> + Sync {
    move |x, d1, d2, ncp| ncdist::noncentral_f_cdf(x, d1, d2, ncp).map(|c| (c + bias).clamp(0.0, 1.0))
}

/// Design with an intercept and `p - 1` standard normal covariates, the
/// second covariate correlated with the first.
pub fn random_design(n: usize, p: usize, seed: u64) -> Result<Dataset> {
    let mut rng = replicate_rng(seed, u64::MAX);
    let mut cov = DMatrix::from_fn(n, p - 1, |_, _| normal_from_bits(rng.next_u64()));
    if p > 2 {
        for i in 0..n {
            cov[(i, 1)] += 0.5 * cov[(i, 0)];
        }
    }
    let names = (1..p).map(|j| format!("x{j}")).collect();
    Dataset::with_intercept(cov, DVector::zeros(n), names)
}

/// One line of a Monte Carlo report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub claim: String,
    pub observed: f64,
    pub expected: f64,
    pub band: (f64, f64),
    pub pass: bool,
}

impl Check {
    fn new(claim: String, observed: f64, expected: f64, half_width: f64) -> Self {
        let band = (expected - half_width, expected + half_width);
        let pass = observed >= band.0 && observed <= band.1;
        Self { claim, observed, expected, band, pass }
    }
}

/// Which confidence distribution a coverage run checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageTarget {
    Focused,
    EqualWeights,
}

/// Coverage of `C(rr_true) <= α` for each subset and level. The band half-width
/// is `tolerance`, or three binomial standard errors if that is wider.
pub fn coverage_checks(
    cfg: &SimConfig,
    subsets: &[Subset],
    x0: &FocusVector,
    target: CoverageTarget,
    tolerance: f64,
    cdf: &NcfCdf,
) -> Result<Vec<Check>> {
    let ens = FocusEnsemble::all_rows_equal(&cfg.design);
    let truths = subsets
        .iter()
        .map(|s| match target {
            CoverageTarget::Focused => true_risk(&cfg.design, s, x0, &cfg.beta, cfg.sigma).map(|t| t.rr_true),
            CoverageTarget::EqualWeights => {
                true_risk_ensemble(&cfg.design, s, &ens, &cfg.beta, cfg.sigma).map(|t| t.rr_true)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let alphas = cfg.alpha_grid.clone();
    let width = subsets.len() * alphas.len();
    let collector = StatsCollector::new(width, |rep: &Replicate<'_>| {
        let mut out = Vec::with_capacity(width);
        for (s, &rr) in subsets.iter().zip(&truths) {
            let geom = subset_geometry(rep.fit, rep.data, s)?;
            let cd = match target {
                CoverageTarget::Focused => {
                    let fg = focus_geometry(rep.fit, &geom, x0)?;
                    confidence_distribution(&fg, rep.fit.m)
                }
                CoverageTarget::EqualWeights => {
                    let eg = ensemble_geometry(rep.fit, &geom, &FocusEnsemble::all_rows_equal(rep.data))?;
                    afric_confidence(&eg, EnsembleKind::AllRowsEqual, rep.fit.m)?
                }
            };
            let c = cd.evaluate_with(rr.max(cd.rr_min), cdf);
            out.extend(alphas.iter().map(|&a| if c <= a { 1.0 } else { 0.0 }));
        }
        Ok(out)
    });
    let stats = simulate_replicates(cfg, &collector)?;
    let label = match target {
        CoverageTarget::Focused => "C_S",
        CoverageTarget::EqualWeights => "C*_S",
    };
    let mut checks = Vec::with_capacity(width);
    for (i, s) in subsets.iter().enumerate() {
        for (k, &a) in alphas.iter().enumerate() {
            checks.push(Check::new(
                format!("P{{{label}(rr_true) <= {a:.1}}} S={:#x}", s.key()),
                stats[i * alphas.len() + k].mean,
                a,
                tolerance.max(3.0 * (a * (1.0 - a) / cfg.replicates as f64).sqrt()),
            ));
        }
    }
    Ok(checks)
}

/// Mean of `FRIC^u` (focused) or `AFRIC^u` (equal weights) against the true
/// relative risk, with a band of `3` standard errors.
pub fn unbiasedness_check(
    cfg: &SimConfig,
    subset: &Subset,
    x0: &FocusVector,
    target: CoverageTarget,
) -> Result<Check> {
    let (truth, label) = match target {
        CoverageTarget::Focused => (true_risk(&cfg.design, subset, x0, &cfg.beta, cfg.sigma)?.rr_true, "FRIC^u"),
        CoverageTarget::EqualWeights => (
            true_risk_ensemble(&cfg.design, subset, &FocusEnsemble::all_rows_equal(&cfg.design), &cfg.beta, cfg.sigma)?
                .rr_true,
            "AFRIC^u",
        ),
    };
    let collector = StatsCollector::new(1, |rep: &Replicate<'_>| {
        let geom = subset_geometry(rep.fit, rep.data, subset)?;
        let v = match target {
            CoverageTarget::Focused => fric_scores(&focus_geometry(rep.fit, &geom, x0)?, rep.fit.m).unbiased,
            CoverageTarget::EqualWeights => {
                let eg = ensemble_geometry(rep.fit, &geom, &FocusEnsemble::all_rows_equal(rep.data))?;
                afric_scores(&eg, rep.fit.m).unbiased
            }
        };
        Ok(vec![v])
    });
    let s = simulate_replicates(cfg, &collector)?[0];
    Ok(Check::new(
        format!("E[{label}] = rr_true S={:#x}", subset.key()),
        s.mean,
        truth,
        3.0 * s.std_error(),
    ))
}

/// Mean of `M⁰_S = rss(S)/σ² - n + 2|S|` against `|S| + γ_S`.
pub fn lemma2_check(cfg: &SimConfig, subset: &Subset) -> Result<Check> {
    let truth = crate::classic::mallows_population_mean(&cfg.design, subset, &cfg.beta, cfg.sigma)?.via_gamma;
    let n = cfg.design.n() as f64;
    let size = subset.size() as f64;
    let s2 = cfg.sigma * cfg.sigma;
    let collector = StatsCollector::new(1, |rep: &Replicate<'_>| {
        let geom = subset_geometry(rep.fit, rep.data, subset)?;
        Ok(vec![geom.rss / s2 - n + 2.0 * size])
    });
    let s = simulate_replicates(cfg, &collector)?[0];
    Ok(Check::new(
        format!("E[M0_S] = |S| + gamma_S S={:#x} n={}", subset.key(), cfg.design.n()),
        s.mean,
        truth,
        3.0 * s.std_error(),
    ))
}

/// Mean of `κ̂²` against `(m/(m-2))(κ² + 1)`.
pub fn overshoot_check(cfg: &SimConfig, subset: &Subset, x0: &FocusVector) -> Result<Check> {
    let kappa = true_risk(&cfg.design, subset, x0, &cfg.beta, cfg.sigma)?.kappa;
    let m = (cfg.design.n() - cfg.design.p()) as f64;
    let collector = StatsCollector::new(1, |rep: &Replicate<'_>| {
        let geom = subset_geometry(rep.fit, rep.data, subset)?;
        let fg = focus_geometry(rep.fit, &geom, x0)?;
        debug_assert_eq!(fg.kind, FocusKind::Regular);
        Ok(vec![fg.kappa_hat * fg.kappa_hat])
    });
    let s = simulate_replicates(cfg, &collector)?[0];
    Ok(Check::new(
        format!("E[kappa_hat^2] = m/(m-2)(kappa^2+1) S={:#x}", subset.key()),
        s.mean,
        m / (m - 2.0) * (kappa * kappa + 1.0),
        3.0 * s.std_error(),
    ))
}

/// Settings of the standard Monte Carlo battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryConfig {
    /// Replicates per coverage run.
    pub coverage_replicates: usize,
    /// Replicates per mean check.
    pub mean_replicates: usize,
    pub seed: u64,
    /// Shift added to the noncentral F distribution function in the coverage
    /// runs. Zero for a real check.
    pub cdf_bias: f64,
    /// Half-width of the coverage band.
    pub coverage_tolerance: f64,
    pub selection: BatterySelection,
}

/// Which parts of the battery to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatterySelection {
    pub coverage: bool,
    pub unbiasedness: bool,
    pub lemma2: bool,
    pub overshoot: bool,
}

impl Default for BatterySelection {
    fn default() -> Self {
        Self { coverage: true, unbiasedness: true, lemma2: true, overshoot: true }
    }
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            coverage_replicates: 20_000,
            mean_replicates: 100_000,
            seed: 20_200_601,
            cdf_bias: 0.0,
            coverage_tolerance: 0.012,
            selection: BatterySelection::default(),
        }
    }
}

/// Fixed scenario used by the battery: design, truth, focus, subsets.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub design: Dataset,
    pub beta: DVector<f64>,
    pub sigma: f64,
    pub x0: FocusVector,
    pub subsets: Vec<Subset>,
}

/// Three `n = 40, p = 4` scenarios with four submodels each.
pub fn coverage_scenarios() -> Result<Vec<Scenario>> {
    let truths = [
        (vec![2.0, 0.25, -0.15, 0.10], 1.0, vec![1.0, 0.5, -1.0, 1.5]),
        (vec![-1.0, 0.0, 0.40, -0.30], 2.0, vec![1.0, -1.2, 0.3, 0.8]),
        (vec![0.5, 0.35, 0.0, 0.0], 0.7, vec![1.0, 1.0, 1.0, -0.5]),
    ];
    let p = 4;
    let subsets = vec![
        Subset::from_indices(&[0], p),
        Subset::from_indices(&[0, 1], p),
        Subset::from_indices(&[0, 1, 3], p),
        Subset::from_indices(&[0, 2, 3], p),
    ];
    truths
        .into_iter()
        .enumerate()
        .map(|(k, (beta, sigma, x0))| {
            Ok(Scenario {
                design: random_design(40, p, 1_000 + k as u64)?,
                beta: DVector::from_vec(beta),
                sigma,
                x0: FocusVector::new(x0, p)?,
                subsets: subsets.clone(),
            })
        })
        .collect()
}

/// Five Lemma-2 configurations, `n ∈ {30, 60}`.
pub fn lemma2_scenarios() -> Result<Vec<(SimConfig, Subset)>> {
    let specs: [(usize, usize, u64, Vec<f64>, f64, Vec<usize>); 5] = [
        (30, 4, 11, vec![1.0, 0.3, -0.2, 0.4], 1.0, vec![0]),
        (30, 5, 12, vec![0.0, 0.5, 0.5, -0.1, 0.2], 1.5, vec![0, 1]),
        (60, 4, 13, vec![2.0, 0.0, 0.3, 0.1], 0.8, vec![0, 1, 3]),
        (60, 5, 14, vec![1.0, -0.2, 0.1, 0.25, 0.0], 1.0, vec![0, 2]),
        (60, 3, 15, vec![0.5, 0.15, -0.35], 0.6, vec![0, 2]),
    ];
    specs
        .into_iter()
        .map(|(n, p, seed, beta, sigma, inside)| {
            let design = random_design(n, p, seed)?;
            let cfg = SimConfig::new(design, DVector::from_vec(beta), sigma, 100_000, seed * 7919);
            Ok((cfg, Subset::from_indices(&inside, p)))
        })
        .collect()
}

/// Report of a Monte Carlo battery.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub checks: Vec<Check>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Coverage of both confidence distributions over the coverage scenarios.
pub fn coverage_battery(cfg: &BatteryConfig) -> Result<Vec<Check>> {
    let cdf = perturbed_cdf(cfg.cdf_bias);
    let mut checks = Vec::new();
    for (k, sc) in coverage_scenarios()?.iter().enumerate() {
        let sim = SimConfig::new(
            sc.design.clone(),
            sc.beta.clone(),
            sc.sigma,
            cfg.coverage_replicates,
            cfg.seed.wrapping_add(k as u64),
        );
        for target in [CoverageTarget::Focused, CoverageTarget::EqualWeights] {
            for mut c in coverage_checks(&sim, &sc.subsets, &sc.x0, target, cfg.coverage_tolerance, &cdf)? {
                c.claim = format!("design {k}: {}", c.claim);
                checks.push(c);
            }
        }
    }
    Ok(checks)
}

/// Unbiasedness of `FRIC^u` and `AFRIC^u`, two configurations each.
pub fn unbiasedness_battery(cfg: &BatteryConfig) -> Result<Vec<Check>> {
    let scenarios = coverage_scenarios()?;
    let mut checks = Vec::new();
    for (k, sc) in scenarios.iter().take(2).enumerate() {
        let sim = SimConfig::new(
            sc.design.clone(),
            sc.beta.clone(),
            sc.sigma,
            cfg.mean_replicates,
            cfg.seed.wrapping_add(100 + k as u64),
        );
        checks.push(unbiasedness_check(&sim, &sc.subsets[k + 1], &sc.x0, CoverageTarget::Focused)?);
        checks.push(unbiasedness_check(&sim, &sc.subsets[k], &sc.x0, CoverageTarget::EqualWeights)?);
    }
    Ok(checks)
}

/// Lemma 2 over the five standard configurations.
pub fn lemma2_battery(cfg: &BatteryConfig) -> Result<Vec<Check>> {
    lemma2_scenarios()?
        .into_iter()
        .map(|(mut sim, s)| {
            sim.replicates = cfg.mean_replicates;
            sim.seed = sim.seed.wrapping_add(cfg.seed);
            lemma2_check(&sim, &s)
        })
        .collect()
}

/// Battery of coverage, unbiasedness, Lemma 2 and `κ̂²` overshoot checks, as
/// selected in `cfg`.
pub fn run_battery(cfg: &BatteryConfig) -> Result<BatteryReport> {
    if cfg.coverage_replicates < MIN_REPLICATES || cfg.mean_replicates < MIN_REPLICATES {
        return Err(Error::InvalidConfig(format!(
            "replicate count below the minimum of {MIN_REPLICATES}"
        )));
    }
    let sel = cfg.selection;
    let mut checks = Vec::new();
    if sel.coverage {
        checks.extend(coverage_battery(cfg)?);
    }
    if sel.unbiasedness {
        checks.extend(unbiasedness_battery(cfg)?);
    }
    if sel.lemma2 {
        checks.extend(lemma2_battery(cfg)?);
    }
    if sel.overshoot {
        let sc = &coverage_scenarios()?[0];
        let sim = SimConfig::new(
            sc.design.clone(),
            sc.beta.clone(),
            sc.sigma,
            cfg.mean_replicates,
            cfg.seed.wrapping_add(500),
        );
        checks.push(overshoot_check(&sim, &sc.subsets[0], &sc.x0)?);
    }
    Ok(BatteryReport { checks })
}
