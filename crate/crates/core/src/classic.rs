//! AIC, its Taylor approximation AIC*, and Mallows' statistic.
//!
//! Additive constants that do not depend on the submodel are dropped, so
//! only differences across submodels carry meaning. AIC and AIC* are
//! "higher is better"; Mallows is "lower is better".

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::regress::{hat_matrix, Dataset, Subset, SubsetGeometry, WideFit};

/// Variance estimate in the Mallows denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MallowsVariance {
    /// `rss_wide / (n - p)`
    #[default]
    Unbiased,
    /// `rss_wide / n`
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicScores {
    /// `-n log(rss(S)/n) - 2|S|`
    pub aic: f64,
    /// `-rss(S) / σ̂²_wide,mle - 2|S|`
    pub aic_star: f64,
    /// `rss(S)/σ̂² - n + 2|S|`
    pub mallows: f64,
}

pub fn classic_scores(fit: &WideFit, geom: &SubsetGeometry, variance: MallowsVariance) -> ClassicScores {
    let n = fit.n as f64;
    let size = geom.subset.size() as f64;
    let wide_mle = fit.rss_wide / n;
    let s2 = match variance {
        MallowsVariance::Unbiased => fit.sigma2_hat,
        MallowsVariance::Mle => wide_mle,
    };
    ClassicScores {
        aic: -n * geom.sigma2_mle.ln() - 2.0 * size,
        aic_star: -geom.rss / wide_mle - 2.0 * size,
        mallows: geom.rss / s2 - n + 2.0 * size,
    }
}

/// Population mean of `M⁰_S = rss(S)/σ² - n + 2|S|` at known truth, by two
/// routes: through `γ_S = n β_{S^c}ᵀ Q_S⁻¹ β_{S^c} / σ²`, and through the
/// hat-matrix bias `φ_S = b_Sᵀ(I - H_S)b_S / σ²` with `b_S = X_{S^c}β_{S^c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MallowsMean {
    pub via_gamma: f64,
    pub via_hat: f64,
}

pub fn mallows_population_mean(
    data: &Dataset,
    subset: &Subset,
    beta: &DVector<f64>,
    sigma: f64,
) -> Result<MallowsMean> {
    subset.check_forced(data)?;
    if beta.len() != data.p() {
        return Err(Error::Dimension("beta length".into()));
    }
    let n = data.n() as f64;
    let size = subset.size() as f64;
    let outside = subset.excluded();
    if outside.is_empty() {
        return Ok(MallowsMean { via_gamma: size, via_hat: size });
    }
    let inside = subset.included();
    let beta_out = beta.select_rows(&outside);
    let sigma_n = data.x().tr_mul(data.x()) / n;
    let s00 = sigma_n.select_rows(&inside).select_columns(&inside);
    let s01 = sigma_n.select_rows(&inside).select_columns(&outside);
    let s11 = sigma_n.select_rows(&outside).select_columns(&outside);
    let s00_inv = s00
        .cholesky()
        .ok_or(Error::SingularSubmodel { key: subset.key(), rcond: 0.0 })?
        .inverse();
    let q_inv = &s11 - s01.tr_mul(&(&s00_inv * &s01));
    let gamma = n * beta_out.dot(&(&q_inv * &beta_out)) / (sigma * sigma);

    let h = hat_matrix(data, subset)?;
    let b = data.x().select_columns(&outside) * &beta_out;
    let resid = &b - &h * &b;
    let phi = b.dot(&resid) / (sigma * sigma);
    Ok(MallowsMean { via_gamma: size + gamma, via_hat: size + phi })
}

/// Relative tolerance on off-diagonal entries of `Σ_n`.
pub const DIAGONAL_TOL: f64 = 1e-10;

/// Winner of the exhaustive AFRIC search when `Σ_n` is diagonal: the forced
/// columns plus every free column `j` with
/// `φ̂_j = ((m-2)/m)(t_j² - 1) > 1`, `t_j² = n β̂_j² Σ_jj / σ̂²`.
pub fn diagonal_fast_winner(fit: &WideFit, data: &Dataset) -> Result<Subset> {
    let p = fit.p();
    let s = &fit.sigma_n;
    for i in 0..p {
        for j in 0..p {
            if i != j && s[(i, j)].abs() > DIAGONAL_TOL * (s[(i, i)] * s[(j, j)]).sqrt() {
                return Err(Error::NotDiagonal(i, j));
            }
        }
    }
    let m = fit.m as f64;
    let shrink = (m - 2.0) / m;
    let mut mask = data.forced().to_vec();
    for (j, keep) in mask.iter_mut().enumerate() {
        if *keep {
            continue;
        }
        let t2 = fit.n as f64 * fit.beta_hat[j].powi(2) * s[(j, j)] / fit.sigma2_hat;
        *keep = shrink * (t2 - 1.0) > 1.0;
    }
    if mask.iter().all(|b| !b) {
        // nothing forced and nothing selected: the empty model is not a
        // candidate, so fall back to the single strongest column
        let best = (0..p)
            .max_by(|&a, &b| {
                let ta = fit.beta_hat[a].powi(2) * s[(a, a)];
                let tb = fit.beta_hat[b].powi(2) * s[(b, b)];
                ta.total_cmp(&tb)
            })
            .unwrap_or(0);
        mask[best] = true;
    }
    Ok(Subset::from_mask(&mask))
}
