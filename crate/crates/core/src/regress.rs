//! Wide-model and submodel least squares.
//!
//! Everything downstream works with the normalized moment matrix
//! `Σ_n = n⁻¹ XᵀX` and its blocks for a subset `S` of columns:
//! `Σ00` (inside × inside), `Σ01` (inside × outside), `Σ11`
//! (outside × outside), and `Q_S`, the outside block of `Σ_n⁻¹`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Reciprocal condition number below which a moment matrix is treated as
/// singular.
pub const RCOND_MIN: f64 = 1e-12;
/// Default cap on the number of free columns enumerated.
pub const MAX_FREE_COLUMNS: usize = 24;

/// Design matrix, response and forced-column mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    names: Vec<String>,
    forced: Vec<bool>,
}

impl Dataset {
    /// Builds a dataset, checking shapes, finiteness and full column rank.
    pub fn new(
        x: DMatrix<f64>,
        y: DVector<f64>,
        names: Vec<String>,
        forced: Vec<bool>,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if p == 0 {
            return Err(Error::Dimension("design has no columns".into()));
        }
        if p > 64 {
            return Err(Error::TooManyColumns(p));
        }
        if y.len() != n {
            return Err(Error::Dimension(format!("{} responses for {} rows", y.len(), n)));
        }
        if names.len() != p || forced.len() != p {
            return Err(Error::Dimension(format!(
                "{} names and {} forced flags for {} columns",
                names.len(),
                forced.len(),
                p
            )));
        }
        if n <= p {
            return Err(Error::TooFewRows(n as i64 - p as i64));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        let sigma = x.tr_mul(&x) / n as f64;
        let rcond = rcond_sym(&sigma);
        if !(rcond >= RCOND_MIN) {
            return Err(Error::RankDeficient { rcond });
        }
        Ok(Self { x, y, names, forced })
    }

    /// Design with a leading all-ones intercept column, forced in.
    pub fn with_intercept(
        covariates: DMatrix<f64>,
        y: DVector<f64>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        let (n, k) = covariates.shape();
        let mut x = DMatrix::from_element(n, k + 1, 1.0);
        x.view_mut((0, 1), (n, k)).copy_from(&covariates);
        let mut names = Vec::with_capacity(k + 1);
        names.push("intercept".to_string());
        names.extend(covariate_names);
        let mut forced = vec![false; k + 1];
        forced[0] = true;
        Self::new(x, y, names, forced)
    }

    /// Same design and mask with a different response. The design was
    /// validated already, so only the response is checked.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::Dimension(format!("{} responses for {} rows", y.len(), self.n())));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(Self { y, ..self.clone() })
    }

    /// Replaces the forced mask.
    pub fn with_forced(mut self, forced: Vec<bool>) -> Result<Self> {
        if forced.len() != self.p() {
            return Err(Error::Dimension("forced mask length".into()));
        }
        self.forced = forced;
        Ok(self)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn forced(&self) -> &[bool] {
        &self.forced
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn forced_bits(&self) -> u64 {
        bits_of(&self.forced)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn bits_of(mask: &[bool]) -> u64 {
    mask.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0u64, |acc, (j, _)| acc | (1u64 << j))
}

/// A set of included columns, stored as a little-endian bit mask. The mask
/// value doubles as the canonical ordering key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    bits: u64,
    p: usize,
}

impl Subset {
    pub fn from_mask(mask: &[bool]) -> Self {
        assert!(mask.len() <= 64, "at most 64 columns");
        Self { bits: bits_of(mask), p: mask.len() }
    }

    pub fn from_bits(bits: u64, p: usize) -> Self {
        assert!(p <= 64, "at most 64 columns");
        let keep = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
        Self { bits: bits & keep, p }
    }

    pub fn from_indices(indices: &[usize], p: usize) -> Self {
        Self::from_bits(indices.iter().fold(0, |acc, &j| acc | (1u64 << j)), p)
    }

    pub fn full(p: usize) -> Self {
        Self::from_bits(u64::MAX, p)
    }

    pub fn key(&self) -> u64 {
        self.bits
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn contains(&self, j: usize) -> bool {
        j < self.p && self.bits >> j & 1 == 1
    }

    pub fn size(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_full(&self) -> bool {
        self.size() == self.p
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.p).map(|j| self.contains(j)).collect()
    }

    pub fn included(&self) -> Vec<usize> {
        (0..self.p).filter(|&j| self.contains(j)).collect()
    }

    pub fn excluded(&self) -> Vec<usize> {
        (0..self.p).filter(|&j| !self.contains(j)).collect()
    }

    /// Checks that every forced column of `data` is included.
    pub fn check_forced(&self, data: &Dataset) -> Result<()> {
        if self.p != data.p() {
            return Err(Error::Dimension(format!(
                "subset over {} columns, dataset has {}",
                self.p,
                data.p()
            )));
        }
        if let Some(j) = (0..self.p).find(|&j| data.forced()[j] && !self.contains(j)) {
            return Err(Error::ForcedColumnMissing(j));
        }
        if self.bits == 0 {
            return Err(Error::Dimension("empty subset".into()));
        }
        Ok(())
    }
}

/// Wide-model least squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct WideFit {
    pub beta_hat: DVector<f64>,
    /// Unbiased residual variance, divisor `m`.
    pub sigma2_hat: f64,
    /// Residual degrees of freedom `n - p`.
    pub m: u32,
    pub n: usize,
    pub sigma_n: DMatrix<f64>,
    pub sigma_n_inv: DMatrix<f64>,
    pub rss_wide: f64,
}

impl WideFit {
    pub fn p(&self) -> usize {
        self.beta_hat.len()
    }

    pub fn sigma_hat(&self) -> f64 {
        self.sigma2_hat.sqrt()
    }
}

/// Least squares fit of the wide model through a QR factorization of `X`.
/// `Σ_n⁻¹ = n R⁻¹R⁻ᵀ` comes from the same factorization.
pub fn fit_wide(data: &Dataset) -> Result<WideFit> {
    let (n, p) = data.x().shape();
    let m = n as i64 - p as i64;
    if m < 3 {
        return Err(Error::TooFewRows(m));
    }
    let qr = data.x().clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    let diag_min = r.diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    let rcond = (diag_min / diag_max).powi(2);
    if !(rcond >= RCOND_MIN * 1e-4) {
        return Err(Error::RankDeficient { rcond });
    }
    let qty = qr.q().tr_mul(data.y());
    let beta_hat = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { rcond })?;
    let resid = data.y() - data.x() * &beta_hat;
    let rss_wide = resid.norm_squared();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient { rcond })?;
    let sigma_n_inv = symmetrize(&(&r_inv * r_inv.transpose() * n as f64));
    let sigma_n = symmetrize(&(data.x().tr_mul(data.x()) / n as f64));
    Ok(WideFit {
        beta_hat,
        sigma2_hat: rss_wide / m as f64,
        m: m as u32,
        n,
        sigma_n,
        sigma_n_inv,
        rss_wide,
    })
}

/// Blocked moment geometry and least squares fit of one submodel.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetGeometry {
    pub subset: Subset,
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
    pub sigma00: DMatrix<f64>,
    pub sigma00_inv: DMatrix<f64>,
    pub sigma01: DMatrix<f64>,
    pub sigma11: DMatrix<f64>,
    /// Outside block of `Σ_n⁻¹`.
    pub q: DMatrix<f64>,
    pub beta_hat: DVector<f64>,
    pub rss: f64,
    pub sigma2_mle: f64,
}

impl SubsetGeometry {
    /// `Σ11 - Σ10 Σ00⁻¹ Σ01`, the inverse of `Q_S`.
    pub fn schur_complement(&self) -> DMatrix<f64> {
        symmetrize(&(&self.sigma11 - self.sigma01.tr_mul(&(&self.sigma00_inv * &self.sigma01))))
    }
}

/// Computes the submodel geometry for `subset`.
pub fn subset_geometry(fit: &WideFit, data: &Dataset, subset: &Subset) -> Result<SubsetGeometry> {
    subset.check_forced(data)?;
    let inside = subset.included();
    let outside = subset.excluded();
    let sigma = &fit.sigma_n;
    let sigma00 = sigma.select_rows(&inside).select_columns(&inside);
    let sigma01 = sigma.select_rows(&inside).select_columns(&outside);
    let sigma11 = sigma.select_rows(&outside).select_columns(&outside);
    let q = symmetrize(&fit.sigma_n_inv.select_rows(&outside).select_columns(&outside));

    let rcond = rcond_sym(&sigma00);
    if !(rcond >= RCOND_MIN) {
        return Err(Error::SingularSubmodel { key: subset.key(), rcond });
    }
    let sigma00_inv = symmetrize(
        &sigma00
            .clone()
            .cholesky()
            .ok_or(Error::SingularSubmodel { key: subset.key(), rcond })?
            .inverse(),
    );

    let xs = data.x().select_columns(&inside);
    let qr = xs.clone().qr();
    let beta_hat = qr
        .r()
        .solve_upper_triangular(&qr.q().tr_mul(data.y()))
        .ok_or(Error::SingularSubmodel { key: subset.key(), rcond })?;
    let rss = (data.y() - &xs * &beta_hat).norm_squared();
    Ok(SubsetGeometry {
        subset: *subset,
        inside,
        outside,
        sigma00,
        sigma00_inv,
        sigma01,
        sigma11,
        q,
        beta_hat,
        rss,
        sigma2_mle: rss / data.n() as f64,
    })
}

/// Hat matrix `H_S = X_S (X_SᵀX_S)⁻¹ X_Sᵀ`. Verification only; the scoring
/// path never forms it.
pub fn hat_matrix(data: &Dataset, subset: &Subset) -> Result<DMatrix<f64>> {
    subset.check_forced(data)?;
    let inside = subset.included();
    let xs = data.x().select_columns(&inside);
    let gram = xs.tr_mul(&xs);
    let rcond = rcond_sym(&gram);
    if !(rcond >= RCOND_MIN) {
        return Err(Error::SingularSubmodel { key: subset.key(), rcond });
    }
    let qr = xs.qr();
    let q = qr.q();
    Ok(&q * q.transpose())
}

/// All subsets that contain the forced columns, in canonical order,
/// optionally filtered by `screen`.
pub fn enumerate_subsets(
    data: &Dataset,
    screen: Option<&dyn Fn(&Subset) -> bool>,
) -> Result<Vec<Subset>> {
    enumerate_subsets_limited(data, screen, MAX_FREE_COLUMNS)
}

/// [`enumerate_subsets`] with an explicit limit on the number of free columns.
pub fn enumerate_subsets_limited(
    data: &Dataset,
    screen: Option<&dyn Fn(&Subset) -> bool>,
    max_free: usize,
) -> Result<Vec<Subset>> {
    let p = data.p();
    let forced = data.forced_bits();
    let free: Vec<usize> = (0..p).filter(|&j| !data.forced()[j]).collect();
    if free.len() > max_free {
        return Err(Error::TooManySubsets { free: free.len(), limit: max_free });
    }
    let mut out = Vec::with_capacity(1 << free.len());
    for code in 0u64..(1u64 << free.len()) {
        let bits = free
            .iter()
            .enumerate()
            .filter(|(k, _)| code >> k & 1 == 1)
            .fold(forced, |acc, (_, &j)| acc | (1u64 << j));
        if bits == 0 {
            continue;
        }
        let s = Subset::from_bits(bits, p);
        if screen.map_or(true, |f| f(&s)) {
            out.push(s);
        }
    }
    out.sort();
    Ok(out)
}

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Reciprocal 2-norm condition number of a symmetric matrix.
pub(crate) fn rcond_sym(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let eig = a.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if max == 0.0 || min <= 0.0 {
        0.0
    } else {
        min / max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> Dataset {
        let x = DMatrix::from_row_slice(
            6,
            3,
            &[1.0, 0.5, 2.0, 1.0, 1.5, 0.0, 1.0, -0.3, 1.0, 1.0, 2.2, -1.0, 1.0, 0.1, 0.5, 1.0, -1.0, 3.0],
        );
        let y = DVector::from_vec(vec![1.0, 2.0, 0.5, 3.0, 1.1, -0.4]);
        Dataset::new(x, y, vec!["c".into(), "a".into(), "b".into()], vec![true, false, false]).unwrap()
    }

    #[test]
    fn orthonormal_interpolation() {
        let x = DMatrix::from_row_slice(
            5,
            2,
            &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        );
        let y = x.column(0).into_owned();
        let data = Dataset::new(x, y, vec!["a".into(), "b".into()], vec![false, false]).unwrap();
        let fit = fit_wide(&data).unwrap();
        assert!((fit.beta_hat[0] - 1.0).abs() < 1e-15);
        assert!(fit.beta_hat[1].abs() < 1e-15);
        assert!(fit.rss_wide < 1e-28);
    }

    #[test]
    fn rank_deficient_rejected() {
        let x = DMatrix::from_row_slice(5, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let y = DVector::from_element(5, 1.0);
        let err = Dataset::new(x, y, vec!["a".into(), "b".into()], vec![false, false]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn too_few_rows_rejected() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 5.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 0.0, 1.0]);
        let data = Dataset::new(x, y, vec!["a".into(), "b".into()], vec![true, false]).unwrap();
        assert_eq!(fit_wide(&data).unwrap_err(), Error::TooFewRows(2));
    }

    #[test]
    fn full_subset_has_empty_q() {
        let data = design();
        let fit = fit_wide(&data).unwrap();
        let g = subset_geometry(&fit, &data, &Subset::full(3)).unwrap();
        assert_eq!(g.q.shape(), (0, 0));
        assert!((g.rss - fit.rss_wide).abs() < 1e-12);
    }

    #[test]
    fn forced_column_required() {
        let data = design();
        let fit = fit_wide(&data).unwrap();
        let s = Subset::from_indices(&[1], 3);
        assert_eq!(subset_geometry(&fit, &data, &s).unwrap_err(), Error::ForcedColumnMissing(0));
    }

    #[test]
    fn sigma_inverse_is_inverse() {
        let data = design();
        let fit = fit_wide(&data).unwrap();
        let prod = &fit.sigma_n * &fit.sigma_n_inv;
        assert!((prod - DMatrix::identity(3, 3)).amax() < 1e-10);
        assert!((fit.sigma2_hat * fit.m as f64 - fit.rss_wide).abs() < 1e-12);
    }

    #[test]
    fn enumeration_counts() {
        let data = design();
        assert_eq!(enumerate_subsets(&data, None).unwrap().len(), 4);
        let all = data.clone().with_forced(vec![true; 3]).unwrap();
        let subs = enumerate_subsets(&all, None).unwrap();
        assert_eq!(subs, vec![Subset::full(3)]);
        let err = enumerate_subsets_limited(&data, None, 1).unwrap_err();
        assert_eq!(err, Error::TooManySubsets { free: 2, limit: 1 });
    }

    #[test]
    fn subset_key_is_little_endian() {
        let s = Subset::from_mask(&[true, false, true, true]);
        assert_eq!(s.key(), 0b1101);
        assert_eq!(s.included(), vec![0, 2, 3]);
        assert_eq!(s.excluded(), vec![1]);
        assert_eq!(s.size(), 3);
        assert!(!s.is_full());
    }
}
