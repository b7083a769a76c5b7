//! Focused relative-risk scores for a single covariate vector `x0`.
//!
//! For a submodel `S`, the estimator `x0_Sᵀβ̂_S` of `μ = x0ᵀβ` has bias
//! `ωᵀβ_{S^c}` with `ω = Σ10 Σ00⁻¹ x0_S - x0_{S^c}`, and its mean squared
//! error relative to the wide estimator is
//!
//! ```text
//! rr_S = (v_sub + ωᵀQω κ²) / v_wide,    v_wide = v_sub + ωᵀQω,
//! ```
//!
//! where `v_wide = x0ᵀΣ_n⁻¹x0`, `v_sub = x0_SᵀΣ00⁻¹x0_S` and `κ` is the
//! standardized bias. The statistic `κ̂²` is noncentral `F_{1,m}(κ²)`, which
//! gives both the FRIC estimators and an exact confidence distribution for
//! `rr_S`.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{DistError, Error, Result};
use crate::ncdist::{self, NCP_CAP};
use crate::regress::{subset_geometry, Dataset, Subset, SubsetGeometry, WideFit};

/// Relative tolerance on `ωᵀQω / v_wide` below which the submodel estimator
/// is treated as exactly unbiased for the focus.
pub const DEGENERATE_TOL: f64 = 1e-14;

/// Covariate vector of the focus parameter, in dataset column order.
#[derive(Debug, Clone, PartialEq)]
pub struct FocusVector(DVector<f64>);

impl FocusVector {
    pub fn new(values: Vec<f64>, p: usize) -> Result<Self> {
        if values.len() != p {
            return Err(Error::Dimension(format!(
                "focus vector has {} entries, design has {p} columns",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("focus vector"));
        }
        Ok(Self(DVector::from_vec(values)))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocusKind {
    /// Ordinary submodel with a nondegenerate bias direction.
    Regular,
    /// `ω = 0` numerically: the submodel estimator is unbiased for this
    /// focus and `rr_S = rr_min` is known exactly.
    ZeroBias,
    /// The wide model itself.
    Wide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusGeometry {
    pub kind: FocusKind,
    pub omega: DVector<f64>,
    /// `ωᵀ Q ω`
    pub wqw: f64,
    /// `x0ᵀ Σ_n⁻¹ x0`
    pub v_wide: f64,
    /// `x0_Sᵀ Σ00⁻¹ x0_S`
    pub v_sub: f64,
    pub rr_min: f64,
    pub kappa_hat: f64,
    pub mu_hat: f64,
    pub n: usize,
    pub sigma2_hat: f64,
}

impl FocusGeometry {
    /// `τ_S² = σ²·ωᵀQω` at the supplied `σ²`.
    pub fn tau2(&self, sigma2: f64) -> f64 {
        sigma2 * self.wqw
    }
}

/// Builds the focus geometry of submodel `geom.subset`.
pub fn focus_geometry(fit: &WideFit, geom: &SubsetGeometry, x0: &FocusVector) -> Result<FocusGeometry> {
    let p = fit.p();
    if x0.len() != p {
        return Err(Error::Dimension("focus vector length".into()));
    }
    let x0v = x0.as_vector();
    let v_wide = x0v.dot(&(&fit.sigma_n_inv * x0v));
    let x0_in = x0v.select_rows(&geom.inside);
    let mu_hat = x0_in.dot(&geom.beta_hat);
    let v_sub = x0_in.dot(&(&geom.sigma00_inv * &x0_in));
    let base = FocusGeometry {
        kind: FocusKind::Wide,
        omega: DVector::zeros(0),
        wqw: 0.0,
        v_wide,
        v_sub: v_wide,
        rr_min: 1.0,
        kappa_hat: 0.0,
        mu_hat,
        n: fit.n,
        sigma2_hat: fit.sigma2_hat,
    };
    if geom.subset.is_full() {
        return Ok(base);
    }

    let x0_out = x0v.select_rows(&geom.outside);
    let omega = geom.sigma01.tr_mul(&(&geom.sigma00_inv * &x0_in)) - x0_out;
    let wqw = omega.dot(&(&geom.q * &omega));
    debug_assert!(
        ((v_sub + wqw) - v_wide).abs() <= 1e-6 * v_wide.max(1e-300),
        "x0ᵀΣ⁻¹x0 = x0_SᵀΣ00⁻¹x0_S + ωᵀQω violated: {v_wide} vs {v_sub} + {wqw}"
    );
    let rr_min = (v_sub / v_wide).clamp(0.0, 1.0);
    if wqw <= DEGENERATE_TOL * v_wide {
        return Ok(FocusGeometry {
            kind: FocusKind::ZeroBias,
            omega,
            wqw: wqw.max(0.0),
            v_sub,
            rr_min,
            ..base
        });
    }
    let beta_out = fit.beta_hat.select_rows(&geom.outside);
    let kappa_hat = (fit.n as f64).sqrt() * omega.dot(&beta_out) / (wqw.sqrt() * fit.sigma_hat());
    Ok(FocusGeometry {
        kind: FocusKind::Regular,
        omega,
        wqw,
        v_sub,
        rr_min,
        kappa_hat,
        ..base
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FricScores {
    pub unbiased: f64,
    pub truncated: f64,
}

/// Unbiased and truncated FRIC scores.
pub fn fric_scores(fg: &FocusGeometry, m: u32) -> FricScores {
    assert!(m >= 3, "FRIC needs m >= 3");
    match fg.kind {
        FocusKind::Wide => FricScores { unbiased: 1.0, truncated: 1.0 },
        FocusKind::ZeroBias => FricScores { unbiased: fg.rr_min, truncated: fg.rr_min },
        FocusKind::Regular => {
            let shrink = (m as f64 - 2.0) / m as f64;
            let k2 = fg.kappa_hat * fg.kappa_hat;
            let bias_term = shrink * fg.wqw * (k2 - 1.0);
            FricScores {
                unbiased: (fg.v_sub + bias_term) / fg.v_wide,
                truncated: (fg.v_sub + if k2 < 1.0 { 0.0 } else { bias_term }) / fg.v_wide,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdKind {
    /// Focused confidence distribution, `F_{1,m}` based.
    Focused,
    /// Equal-weights averaged confidence distribution, `F_{p-|S|,m}` based.
    Afric,
    /// Unit step at `rr_min`.
    Degenerate,
}

/// Confidence distribution for a relative risk with a pointmass at the
/// smallest attainable value.
///
/// `C(rr) = 1 - F_{d1,m}(stat_obs; slope·rr + offset)` for `rr >= rr_min`,
/// where the affine map sends `rr_min` to noncentrality zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceDistribution {
    pub kind: CdKind,
    pub d1: u32,
    pub m: u32,
    pub stat_obs: f64,
    pub rr_min: f64,
    pub slope: f64,
    pub offset: f64,
}

impl ConfidenceDistribution {
    pub fn step(rr_min: f64, m: u32) -> Self {
        Self { kind: CdKind::Degenerate, d1: 1, m, stat_obs: 0.0, rr_min, slope: 0.0, offset: 0.0 }
    }

    /// Noncentrality corresponding to relative risk `rr`.
    pub fn ncp_at(&self, rr: f64) -> f64 {
        (self.slope * rr + self.offset).max(0.0)
    }

    /// Relative risk corresponding to noncentrality `ncp`.
    pub fn rr_at(&self, ncp: f64) -> f64 {
        (ncp - self.offset) / self.slope
    }

    /// Evaluates `C(rr)` through the supplied noncentral F distribution
    /// function. Noncentralities beyond the cap saturate at 1.
    pub fn evaluate_with<F>(&self, rr: f64, cdf: F) -> f64
    where
        F: Fn(f64, u32, u32, f64) -> std::result::Result<f64, DistError>,
    {
        if rr < self.rr_min {
            return 0.0;
        }
        if self.kind == CdKind::Degenerate {
            return 1.0;
        }
        let ncp = if rr <= self.rr_min { 0.0 } else { self.ncp_at(rr) };
        if ncp > NCP_CAP {
            return 1.0;
        }
        match cdf(self.stat_obs, self.d1, self.m, ncp) {
            Ok(c) => (1.0 - c).clamp(0.0, 1.0),
            Err(DistError::NcpTooLarge(_)) => 1.0,
            Err(e) => panic!("confidence distribution evaluation failed: {e}"),
        }
    }

    /// `C(rr)`; zero below `rr_min`, nondecreasing, tending to 1.
    pub fn evaluate(&self, rr: f64) -> f64 {
        self.evaluate_with(rr, ncdist::noncentral_f_cdf)
    }

    /// Confidence placed on the minimum value `rr_min`.
    pub fn pointmass(&self) -> f64 {
        self.evaluate(self.rr_min)
    }

    /// Confidence that the submodel beats the wide model, `C(1)`.
    pub fn conf(&self) -> f64 {
        self.evaluate(1.0)
    }

    /// `min { rr >= rr_min : C(rr) >= level }`. Infinite when the level is
    /// only reached beyond the noncentrality cap.
    pub fn quantile(&self, level: f64) -> f64 {
        assert!(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
        if self.kind == CdKind::Degenerate || self.pointmass() >= level {
            return self.rr_min;
        }
        let ncp = match ncdist::invert_ncp(1.0 - level, self.stat_obs, self.d1, self.m) {
            Ok(v) => v,
            Err(DistError::OutOfRange { .. }) | Err(DistError::NcpTooLarge(_)) => {
                return f64::INFINITY
            }
            Err(e) => panic!("quantile inversion failed: {e}"),
        };
        let mut rr = self.rr_at(ncp).max(self.rr_min);
        // the affine map can round to the wrong side of the root
        let mut bump = rr.abs().max(1e-300) * 4.0 * f64::EPSILON;
        while self.evaluate(rr) < level {
            rr += bump;
            bump *= 2.0;
        }
        rr
    }

    /// Median confidence estimate.
    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Equal-tailed interval `[C⁻¹((1-level)/2), C⁻¹((1+level)/2)]`; the lower
    /// end is `rr_min` when the pointmass already exceeds `(1-level)/2`.
    pub fn interval(&self, level: f64) -> (f64, f64) {
        let tail = 0.5 * (1.0 - level);
        (self.quantile(tail), self.quantile(1.0 - tail))
    }
}

/// Confidence distribution for `rr_S` from a focus geometry.
pub fn confidence_distribution(fg: &FocusGeometry, m: u32) -> ConfidenceDistribution {
    match fg.kind {
        FocusKind::Wide => ConfidenceDistribution::step(1.0, m),
        FocusKind::ZeroBias => ConfidenceDistribution::step(fg.rr_min, m),
        FocusKind::Regular => ConfidenceDistribution {
            kind: CdKind::Focused,
            d1: 1,
            m,
            stat_obs: fg.kappa_hat * fg.kappa_hat,
            rr_min: fg.rr_min,
            slope: fg.v_wide / fg.wqw,
            offset: -fg.v_sub / fg.wqw,
        },
    }
}

/// `FRIC^0.50`, the median confidence estimate of `rr_S`.
pub fn median_fric(cd: &ConfidenceDistribution) -> f64 {
    cd.median()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FricVariant {
    Unbiased,
    #[default]
    Truncated,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortKey {
    /// Ascending by the chosen FRIC variant.
    #[default]
    Fric,
    /// Descending by `conf(S)`; the wide row goes last.
    Conf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub level: f64,
    pub variant: FricVariant,
    pub sort: SortKey,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { level: 0.80, variant: FricVariant::Truncated, sort: SortKey::Fric }
    }
}

/// One submodel's line in a focused ranking table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub subset: Subset,
    pub mu_hat: f64,
    pub fric_u: f64,
    pub fric_t: f64,
    pub fric_median: f64,
    /// `C_S(1)`; absent for the wide model.
    pub conf: Option<f64>,
    pub rr_min: f64,
    pub kappa_hat: f64,
    /// Equal-tailed confidence interval for `rr_S`.
    pub rr_interval: (f64, f64),
    /// Submodel-based t interval for `μ`. It uses the submodel's own
    /// variance estimate and ignores the submodel's bias.
    pub mu_interval: (f64, f64),
    pub cd: ConfidenceDistribution,
}

impl ScoreRow {
    pub fn fric(&self, variant: FricVariant) -> f64 {
        match variant {
            FricVariant::Unbiased => self.fric_u,
            FricVariant::Truncated => self.fric_t,
            FricVariant::Median => self.fric_median,
        }
    }
}

/// Scores one subset.
pub fn score_row(
    fit: &WideFit,
    data: &Dataset,
    x0: &FocusVector,
    subset: &Subset,
    level: f64,
) -> Result<ScoreRow> {
    let geom = subset_geometry(fit, data, subset)?;
    let fg = focus_geometry(fit, &geom, x0)?;
    let scores = fric_scores(&fg, fit.m);
    let cd = confidence_distribution(&fg, fit.m);
    let is_wide = fg.kind == FocusKind::Wide;

    let df = (data.n() - subset.size()) as u32;
    let s2_sub = geom.rss / df as f64;
    let se = (s2_sub * fg.v_sub / data.n() as f64).sqrt();
    let tq = ncdist::t_quantile(0.5 + 0.5 * level, df);

    Ok(ScoreRow {
        subset: *subset,
        mu_hat: fg.mu_hat,
        fric_u: scores.unbiased,
        fric_t: scores.truncated,
        fric_median: if is_wide { 1.0 } else { cd.median() },
        conf: (!is_wide).then(|| cd.conf()),
        rr_min: fg.rr_min,
        kappa_hat: fg.kappa_hat,
        rr_interval: if is_wide { (1.0, 1.0) } else { cd.interval(level) },
        mu_interval: (fg.mu_hat - tq * se, fg.mu_hat + tq * se),
        cd,
    })
}

/// Sorts rows by `key`, breaking ties by the canonical subset key.
pub fn sort_rows(rows: &mut [ScoreRow], variant: FricVariant, key: SortKey) {
    match key {
        SortKey::Fric => rows.sort_by(|a, b| {
            a.fric(variant)
                .total_cmp(&b.fric(variant))
                .then(a.subset.key().cmp(&b.subset.key()))
        }),
        SortKey::Conf => rows.sort_by(|a, b| {
            let ca = a.conf.unwrap_or(f64::NEG_INFINITY);
            let cb = b.conf.unwrap_or(f64::NEG_INFINITY);
            cb.total_cmp(&ca).then(a.subset.key().cmp(&b.subset.key()))
        }),
    }
}

/// Focused ranking table over `subsets`.
pub fn score_table(
    fit: &WideFit,
    data: &Dataset,
    x0: &FocusVector,
    subsets: &[Subset],
    opts: &TableOptions,
) -> Result<Vec<ScoreRow>> {
    let mut rows = subsets
        .par_iter()
        .map(|s| score_row(fit, data, x0, s, opts.level))
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows, opts.variant, opts.sort);
    Ok(rows)
}

/// Confidence curve for the root mean squared error of the wide estimator,
/// `cc(r) = |1 - 2 Γ_m(m·rmse_hat²/r²)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseCurve {
    pub rmse_hat: f64,
    pub m: u32,
}

impl RmseCurve {
    pub fn cc(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        let m = self.m as f64;
        (1.0 - 2.0 * ncdist::chi2_cdf(m * self.rmse_hat * self.rmse_hat / (r * r), self.m)).abs()
    }

    /// The zero of the curve.
    pub fn median(&self) -> f64 {
        self.rmse_hat * (self.m as f64 / ncdist::chi2_quantile(0.5, self.m)).sqrt()
    }

    /// `{ r : cc(r) <= level }`.
    pub fn interval(&self, level: f64) -> (f64, f64) {
        let m = self.m as f64;
        let at = |p: f64| self.rmse_hat * (m / ncdist::chi2_quantile(p, self.m)).sqrt();
        (at(0.5 + 0.5 * level), at(0.5 - 0.5 * level))
    }
}

/// Estimated rmse of `x0ᵀβ̂_wide` and its confidence curve.
pub fn rmse_wide_curve(fit: &WideFit, x0: &FocusVector) -> RmseCurve {
    let x = x0.as_vector();
    let v_wide = x.dot(&(&fit.sigma_n_inv * x));
    RmseCurve { rmse_hat: (fit.sigma2_hat / fit.n as f64 * v_wide).sqrt(), m: fit.m }
}
