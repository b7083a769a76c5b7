//! Averaged FRIC over a weighted ensemble of focus vectors.
//!
//! With loss weights `v(u)` on covariate vectors `x(u)`, the relative total
//! risk of submodel `S` against the wide model is
//! `(Σ v(u) x_S(u)ᵀΣ00⁻¹x_S(u) + γ_S) / Σ v(u) x(u)ᵀΣ_n⁻¹x(u)` with
//! `γ_S = n β_{S^c}ᵀ A_S β_{S^c} / σ²` and `A_S = Σ v(u) ω(u)ω(u)ᵀ`.
//! Weights need not sum to one; every score is a ratio in them.
//!
//! When every data row gets weight `1/n`, `A_S = Q_S⁻¹` and the statistic
//! `γ̃_S / (p - |S|)` is noncentral `F_{p-|S|,m}(γ_S)`, which yields an
//! exact confidence distribution.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::focus::{CdKind, ConfidenceDistribution};
use crate::regress::{subset_geometry, Dataset, Subset, SubsetGeometry, WideFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Explicit,
    AllRowsEqual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusEnsemble {
    points: Vec<(DVector<f64>, f64)>,
    kind: EnsembleKind,
}

impl FocusEnsemble {
    /// Every data row, weight `1/n` each.
    pub fn all_rows_equal(data: &Dataset) -> Self {
        let w = 1.0 / data.n() as f64;
        let points = data
            .x()
            .row_iter()
            .map(|r| (r.transpose(), w))
            .collect();
        Self { points, kind: EnsembleKind::AllRowsEqual }
    }

    /// Arbitrary focus vectors with positive weights.
    pub fn explicit(points: Vec<(DVector<f64>, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidEnsemble("no focus vectors".into()));
        }
        let p = points[0].0.len();
        for (x, w) in &points {
            if x.len() != p {
                return Err(Error::InvalidEnsemble("focus vectors differ in length".into()));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::InvalidEnsemble(format!("weight {w} is not positive")));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("ensemble focus vector"));
            }
        }
        Ok(Self { points, kind: EnsembleKind::Explicit })
    }

    /// Data rows selected by `keep`, each with weight `1/|stratum|`.
    pub fn stratum(data: &Dataset, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let rows: Vec<_> = (0..data.n()).filter(|&i| keep(i)).collect();
        if rows.is_empty() {
            return Err(Error::InvalidEnsemble("stratum selects no rows".into()));
        }
        let w = 1.0 / rows.len() as f64;
        Self::explicit(rows.iter().map(|&i| (data.x().row(i).transpose(), w)).collect())
    }

    pub fn points(&self) -> &[(DVector<f64>, f64)] {
        &self.points
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    /// Same points with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let points = self.points.iter().map(|(x, w)| (x.clone(), w * c)).collect();
        match self.kind {
            EnsembleKind::Explicit => Self::explicit(points),
            EnsembleKind::AllRowsEqual => Ok(Self { points, kind: EnsembleKind::Explicit }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleGeometry {
    pub subset: Subset,
    pub p: usize,
    /// `A_S = Σ v(u) ω(u)ω(u)ᵀ`
    pub a: DMatrix<f64>,
    /// `Σ v(u) x(u)ᵀΣ_n⁻¹x(u)`
    pub denom: f64,
    /// `Σ v(u) x_S(u)ᵀΣ00⁻¹x_S(u)`
    pub num_var: f64,
    /// `n β̂_{S^c}ᵀ A_S β̂_{S^c} / σ̂²`
    pub gamma_tilde: f64,
    /// `Tr(A_S Q_S)`
    pub tr_aq: f64,
}

/// `A_S` by explicit summation over the ensemble.
pub fn ensemble_a_by_summation(geom: &SubsetGeometry, ens: &FocusEnsemble) -> DMatrix<f64> {
    let k = geom.outside.len();
    let proj = geom.sigma01.tr_mul(&geom.sigma00_inv);
    let mut a = DMatrix::zeros(k, k);
    for (x, w) in ens.points() {
        let omega = &proj * x.select_rows(&geom.inside) - x.select_rows(&geom.outside);
        a.ger(*w, &omega, &omega, 1.0);
    }
    a
}

pub fn ensemble_geometry(
    fit: &WideFit,
    geom: &SubsetGeometry,
    ens: &FocusEnsemble,
) -> Result<EnsembleGeometry> {
    let p = fit.p();
    if ens.points().iter().any(|(x, _)| x.len() != p) {
        return Err(Error::Dimension("ensemble focus vectors do not match design".into()));
    }
    let mut denom = 0.0;
    let mut num_var = 0.0;
    for (x, w) in ens.points() {
        denom += w * x.dot(&(&fit.sigma_n_inv * x));
        let xs = x.select_rows(&geom.inside);
        num_var += w * xs.dot(&(&geom.sigma00_inv * &xs));
    }
    let a = match ens.kind() {
        EnsembleKind::AllRowsEqual => geom.schur_complement(),
        EnsembleKind::Explicit => ensemble_a_by_summation(geom, ens),
    };
    let beta_out = fit.beta_hat.select_rows(&geom.outside);
    let gamma_tilde = if geom.outside.is_empty() {
        0.0
    } else {
        fit.n as f64 * beta_out.dot(&(&a * &beta_out)) / fit.sigma2_hat
    };
    let tr_aq = (&a * &geom.q).trace();
    Ok(EnsembleGeometry { subset: geom.subset, p, a, denom, num_var, gamma_tilde, tr_aq })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfricScores {
    pub unbiased: f64,
    pub truncated: f64,
}

pub fn afric_scores(eg: &EnsembleGeometry, m: u32) -> AfricScores {
    assert!(m >= 3, "AFRIC needs m >= 3");
    if eg.subset.is_full() {
        return AfricScores { unbiased: 1.0, truncated: 1.0 };
    }
    let shrink = (m as f64 - 2.0) / m as f64;
    let excess = eg.gamma_tilde - eg.tr_aq;
    AfricScores {
        unbiased: (eg.num_var + shrink * excess) / eg.denom,
        truncated: (eg.num_var + shrink * excess.max(0.0)) / eg.denom,
    }
}

/// Exact confidence distribution for the equal-weights relative risk,
/// `C*(rr) = 1 - F_{p-|S|,m}(γ̃/(p-|S|); p·rr - |S|)` for `rr >= |S|/p`.
pub fn afric_confidence(
    eg: &EnsembleGeometry,
    kind: EnsembleKind,
    m: u32,
) -> Result<ConfidenceDistribution> {
    if kind != EnsembleKind::AllRowsEqual {
        return Err(Error::UnsupportedEnsemble);
    }
    let p = eg.p as f64;
    let size = eg.subset.size() as f64;
    if eg.subset.is_full() {
        return Ok(ConfidenceDistribution::step(1.0, m));
    }
    let d1 = (eg.p - eg.subset.size()) as u32;
    Ok(ConfidenceDistribution {
        kind: CdKind::Afric,
        d1,
        m,
        stat_obs: eg.gamma_tilde / d1 as f64,
        rr_min: size / p,
        slope: p,
        offset: -size,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AfricRow {
    pub subset: Subset,
    pub afric_u: f64,
    pub afric_t: f64,
    pub gamma_tilde: f64,
    /// Equal-weights ensembles only.
    pub afric_median: Option<f64>,
    /// `C*_S(1)`, equal-weights ensembles and non-wide rows only.
    pub conf: Option<f64>,
    pub cd: Option<ConfidenceDistribution>,
}

pub fn afric_row(
    fit: &WideFit,
    data: &Dataset,
    ens: &FocusEnsemble,
    subset: &Subset,
) -> Result<AfricRow> {
    let geom = subset_geometry(fit, data, subset)?;
    let eg = ensemble_geometry(fit, &geom, ens)?;
    let scores = afric_scores(&eg, fit.m);
    let cd = match afric_confidence(&eg, ens.kind(), fit.m) {
        Ok(cd) => Some(cd),
        Err(Error::UnsupportedEnsemble) => None,
        Err(e) => return Err(e),
    };
    let wide = subset.is_full();
    Ok(AfricRow {
        subset: *subset,
        afric_u: scores.unbiased,
        afric_t: scores.truncated,
        gamma_tilde: eg.gamma_tilde,
        afric_median: cd.map(|c| if wide { 1.0 } else { c.median() }),
        conf: cd.filter(|_| !wide).map(|c| c.conf()),
        cd,
    })
}

/// AFRIC ranking, ascending by the truncated score, ties by subset key.
pub fn afric_table(
    fit: &WideFit,
    data: &Dataset,
    ens: &FocusEnsemble,
    subsets: &[Subset],
) -> Result<Vec<AfricRow>> {
    let mut rows = subsets
        .par_iter()
        .map(|s| afric_row(fit, data, ens, s))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.afric_t.total_cmp(&b.afric_t).then(a.subset.key().cmp(&b.subset.key())));
    Ok(rows)
}
