//! Central and noncentral distribution functions.
//!
//! All noncentral functions take the argument first and the noncentrality
//! (excentre) parameter last, so `noncentral_f_cdf(x, d1, d2, ncp)` is the
//! probability `P(F <= x)` for `F ~ F_{d1,d2}(ncp)`.
//!
//! The noncentral F distribution function is evaluated as a Poisson mixture
//! of regularized incomplete beta functions, summed outward from the modal
//! Poisson index. Truncation happens once the Poisson mass that remains
//! unsummed is below `1e-14`.

use crate::error::DistError;

/// Truncation threshold for the Poisson mixture tail.
pub const TAIL_MASS: f64 = 1e-14;
/// Largest noncentrality accepted by the noncentral routines.
pub const NCP_CAP: f64 = 1e6;
/// Series length after which evaluation is abandoned.
pub const MAX_TERMS: usize = 1_000_000;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Natural log of the beta function.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=20_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` where the caller also supplies
/// `xc = 1 - x` (computed without cancellation where possible).
fn beta_reg_pair(a: f64, b: f64, x: f64, xc: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if xc <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * xc.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_front.exp() * beta_cf(b, a, xc) / b).clamp(0.0, 1.0)
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    beta_reg_pair(a, b, x, 1.0 - x)
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn gamma_lower_reg(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let ln_front = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..100_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (sum * ln_front.exp()).clamp(0.0, 1.0)
    } else {
        // Lentz continued fraction for Q(a, x)
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (1.0 - ln_front.exp() * h).clamp(0.0, 1.0)
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

/// Distribution function `Γ_m(x)` of the chi-squared law with `m` degrees
/// of freedom. Nonpositive `x` gives 0.
pub fn chi2_cdf(x: f64, m: u32) -> f64 {
    if x <= 0.0 || m == 0 {
        return if m == 0 && x >= 0.0 { 1.0 } else { 0.0 };
    }
    gamma_lower_reg(0.5 * m as f64, 0.5 * x)
}

/// Quantile of the chi-squared law, by bracketing and bisection.
pub fn chi2_quantile(p: f64, m: u32) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut hi = m as f64 + 10.0;
    while chi2_cdf(hi, m) < p {
        hi *= 2.0;
    }
    bisect(|x| chi2_cdf(x, m) - p, 0.0, hi)
}

/// Central F distribution function.
pub fn central_f_cdf(x: f64, d1: u32, d2: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let (d1, d2) = (d1 as f64, d2 as f64);
    let denom = d1 * x + d2;
    beta_reg_pair(0.5 * d1, 0.5 * d2, d1 * x / denom, d2 / denom)
}

/// Central Student t distribution function.
pub fn t_cdf(x: f64, m: u32) -> f64 {
    let mf = m as f64;
    let tail = 0.5 * beta_reg_pair(0.5 * mf, 0.5, mf / (mf + x * x), x * x / (mf + x * x));
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Central Student t quantile.
pub fn t_quantile(p: f64, m: u32) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p < 0.5 {
        return -t_quantile(1.0 - p, m);
    }
    let mut hi = 2.0;
    while t_cdf(hi, m) < p {
        hi *= 2.0;
    }
    bisect(|x| t_cdf(x, m) - p, 0.0, hi)
}

/// Root of an increasing function on `[lo, hi]` by bisection to machine
/// resolution.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_ncp(ncp: f64) -> Result<(), DistError> {
    if !ncp.is_finite() || ncp < 0.0 {
        return Err(DistError::InvalidParameter(format!(
            "noncentrality must be finite and nonnegative, got {ncp}"
        )));
    }
    if ncp > NCP_CAP {
        return Err(DistError::NcpTooLarge(ncp));
    }
    Ok(())
}

fn check_df(d: u32, name: &str) -> Result<(), DistError> {
    if d == 0 {
        return Err(DistError::InvalidParameter(format!("{name} must be >= 1")));
    }
    Ok(())
}

/// `ln` of the Poisson probability of `j` at mean `lam`.
fn ln_poisson(j: f64, lam: f64) -> f64 {
    -lam + j * lam.ln() - ln_gamma(j + 1.0)
}

/// Noncentral F distribution function `F_{d1,d2}(x; ncp)`.
///
/// With `ncp = 0` this is exactly [`central_f_cdf`].
pub fn noncentral_f_cdf(x: f64, d1: u32, d2: u32, ncp: f64) -> Result<f64, DistError> {
    check_df(d1, "d1")?;
    check_df(d2, "d2")?;
    check_ncp(ncp)?;
    if x.is_nan() {
        return Err(DistError::InvalidParameter("x is NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if ncp == 0.0 {
        return Ok(central_f_cdf(x, d1, d2));
    }

    let a0 = 0.5 * d1 as f64;
    let b = 0.5 * d2 as f64;
    let denom = d1 as f64 * x + d2 as f64;
    let y = d1 as f64 * x / denom;
    let yc = d2 as f64 / denom;
    let (ln_y, ln_yc) = (y.ln(), yc.ln());
    let lam = 0.5 * ncp;

    // I_y(a, b) - I_y(a + 1, b)
    let step = |a: f64| (a * ln_y + b * ln_yc - a.ln() - ln_beta(a, b)).exp();

    let mode = lam.floor();
    let w_mode = ln_poisson(mode, lam).exp();
    let i_mode = beta_reg_pair(a0 + mode, b, y, yc);

    let mut total = w_mode * i_mode;
    let mut mass = w_mode;
    let mut terms = 1usize;

    // downward from the mode; remaining left mass below j is bounded by
    // w_j * r / (1 - r) with r = j / lam
    let mut j = mode;
    let mut w = w_mode;
    let mut i_j = i_mode;
    while j > 0.0 {
        let a = a0 + j - 1.0;
        i_j += step(a);
        w *= j / lam;
        j -= 1.0;
        total += w * i_j.min(1.0);
        mass += w;
        terms += 1;
        let r = j / lam;
        if r < 1.0 && w * r / (1.0 - r) < 0.1 * TAIL_MASS {
            break;
        }
    }

    // upward from the mode; remaining contribution is at most I_j * (1 - mass)
    let mut j = mode;
    let mut w = w_mode;
    let mut i_j = i_mode;
    let mut t = step(a0 + mode);
    loop {
        if (1.0 - mass) < TAIL_MASS || (1.0 - mass) * i_j < 0.1 * TAIL_MASS {
            break;
        }
        if terms >= MAX_TERMS {
            return Err(DistError::NonConvergence(MAX_TERMS));
        }
        let a = a0 + j;
        i_j = (i_j - t).max(0.0);
        t *= y * (a + b) / (a + 1.0);
        j += 1.0;
        w *= lam / j;
        total += w * i_j;
        mass += w;
        terms += 1;
        if w == 0.0 && j > lam {
            break;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Finds the noncentrality `ncp >= 0` with
/// `noncentral_f_cdf(x, d1, d2, ncp) == target_cdf`.
///
/// The distribution function is strictly decreasing in `ncp` for `x > 0`,
/// so the solution is unique. The returned value sits on the side of the
/// root where the distribution function is at or below the target, within
/// `1e-10` of it.
pub fn invert_ncp(target_cdf: f64, x: f64, d1: u32, d2: u32) -> Result<f64, DistError> {
    check_df(d1, "d1")?;
    check_df(d2, "d2")?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(DistError::InvalidParameter(format!("x must be positive, got {x}")));
    }
    let central = central_f_cdf(x, d1, d2);
    if !(target_cdf > 0.0) || target_cdf > central {
        return Err(DistError::OutOfRange { target: target_cdf, central });
    }
    if central - target_cdf <= 1e-12 {
        return Ok(0.0);
    }
    let f = |ncp: f64| noncentral_f_cdf(x, d1, d2, ncp).map(|c| c - target_cdf);

    let (mut lo, mut f_lo) = (0.0, central - target_cdf);
    let mut hi = 1.0;
    let mut f_hi = f(hi)?;
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if hi > NCP_CAP {
            return Err(DistError::OutOfRange { target: target_cdf, central });
        }
        f_hi = f(hi)?;
    }

    // Illinois regula falsi with a bisection fallback. Invariant: f_lo > 0 >= f_hi.
    let mut side = 0i8;
    for _ in 0..300 {
        if -f_hi <= 1e-13 || hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mut mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let f_mid = f(mid)?;
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(hi)
}

/// Noncentral Student t distribution function `P(T <= x)` for
/// `T ~ t_m(delta)`.
pub fn noncentral_t_cdf(x: f64, m: u32, delta: f64) -> Result<f64, DistError> {
    check_df(m, "m")?;
    if !delta.is_finite() || x.is_nan() {
        return Err(DistError::InvalidParameter("non-finite argument".into()));
    }
    if 0.5 * delta * delta > NCP_CAP {
        return Err(DistError::NcpTooLarge(delta * delta));
    }
    if x < 0.0 {
        return noncentral_t_cdf(-x, m, -delta).map(|c| (1.0 - c).clamp(0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let base = normal_cdf(-delta);
    if x == 0.0 {
        return Ok(base);
    }

    let mf = m as f64;
    let b = 0.5 * mf;
    let y = x * x / (x * x + mf);
    let yc = mf / (x * x + mf);
    let lam = 0.5 * delta * delta;
    let (ln_y, ln_yc) = (y.ln(), yc.ln());
    let step = |a: f64| (a * ln_y + b * ln_yc - a.ln() - ln_beta(a, b)).exp();
    let ln_half_delta = if delta != 0.0 {
        (delta.abs() / std::f64::consts::SQRT_2).ln()
    } else {
        f64::NEG_INFINITY
    };
    let sign = delta.signum();

    // Forward summation in j with two incomplete-beta chains, a = j + 1/2
    // and a = j + 1. Weights are computed directly in log space.
    let mut i_half = beta_reg_pair(0.5, b, y, yc);
    let mut i_one = beta_reg_pair(1.0, b, y, yc);
    let mut sum = 0.0;
    let mut mass = 0.0;
    let mut j = 0.0f64;
    loop {
        let ln_p = if lam > 0.0 { ln_poisson(j, lam) } else if j == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        let p = ln_p.exp();
        let q = if delta != 0.0 {
            sign * (-lam + j * lam.ln() + ln_half_delta - ln_gamma(j + 1.5)).exp()
        } else {
            0.0
        };
        sum += p * i_half + q * i_one;
        mass += p;
        if j > lam && ((1.0 - mass) * (1.0 + delta.abs()) < 1e-16 || p == 0.0 && q == 0.0) {
            break;
        }
        if j as usize >= MAX_TERMS {
            return Err(DistError::NonConvergence(MAX_TERMS));
        }
        i_half = (i_half - step(j + 0.5)).max(0.0);
        i_one = (i_one - step(j + 1.0)).max(0.0);
        j += 1.0;
    }
    Ok((base + 0.5 * sum).clamp(0.0, 1.0))
}

/// A noncentral F law with `(d1, d2)` degrees of freedom and noncentrality
/// `ncp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralF {
    d1: u32,
    d2: u32,
    ncp: f64,
}

impl NoncentralF {
    pub fn new(d1: u32, d2: u32, ncp: f64) -> Result<Self, DistError> {
        check_df(d1, "d1")?;
        check_df(d2, "d2")?;
        check_ncp(ncp)?;
        Ok(Self { d1, d2, ncp })
    }

    pub fn d1(&self) -> u32 {
        self.d1
    }

    pub fn d2(&self) -> u32 {
        self.d2
    }

    pub fn ncp(&self) -> f64 {
        self.ncp
    }

    pub fn cdf(&self, x: f64) -> Result<f64, DistError> {
        noncentral_f_cdf(x, self.d1, self.d2, self.ncp)
    }

    pub fn sf(&self, x: f64) -> Result<f64, DistError> {
        self.cdf(x).map(|c| 1.0 - c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_boundaries() {
        assert_eq!(chi2_cdf(0.0, 4), 0.0);
        assert_eq!(chi2_cdf(-1.0, 4), 0.0);
        let half = chi2_cdf(2.0 * std::f64::consts::LN_2, 2);
        assert!((half - 0.5).abs() < 1e-15, "{half}");
    }

    #[test]
    fn chi2_two_df_closed_form() {
        for &x in &[0.01, 0.3, 1.0, 2.7, 9.0, 40.0] {
            let exact = 1.0 - (-0.5 * x as f64).exp();
            assert!((chi2_cdf(x, 2) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn ln_gamma_integers() {
        let mut fact = 1.0f64;
        for k in 1..30 {
            fact *= k as f64;
            let rel = (ln_gamma(k as f64 + 1.0) - fact.ln()).abs() / fact.ln().max(1.0);
            assert!(rel < 1e-14, "k = {k}");
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn symmetric_f_is_half_at_one() {
        let c = noncentral_f_cdf(1.0, 5, 5, 0.0).unwrap();
        assert!((c - 0.5).abs() < 1e-14, "{c}");
    }

    #[test]
    fn f_cdf_edges() {
        assert_eq!(noncentral_f_cdf(0.0, 3, 9, 2.0).unwrap(), 0.0);
        assert_eq!(noncentral_f_cdf(-2.0, 3, 9, 2.0).unwrap(), 0.0);
        assert_eq!(noncentral_f_cdf(f64::INFINITY, 3, 9, 2.0).unwrap(), 1.0);
        assert!(noncentral_f_cdf(1.0, 3, 9, -0.1).is_err());
        assert!(matches!(
            noncentral_f_cdf(1.0, 3, 9, 2e6),
            Err(DistError::NcpTooLarge(_))
        ));
        assert!(noncentral_f_cdf(1.0, 0, 9, 1.0).is_err());
    }

    #[test]
    fn invert_ncp_boundary_returns_zero() {
        let c0 = central_f_cdf(2.0, 1, 40);
        assert_eq!(invert_ncp(c0, 2.0, 1, 40).unwrap(), 0.0);
        assert!(matches!(
            invert_ncp(c0 + 1e-6, 2.0, 1, 40),
            Err(DistError::OutOfRange { .. })
        ));
        assert!(invert_ncp(0.0, 2.0, 1, 40).is_err());
    }

    #[test]
    fn invert_ncp_round_trip() {
        let target = noncentral_f_cdf(2.5, 1, 50, 3.7).unwrap();
        let ncp = invert_ncp(target, 2.5, 1, 50).unwrap();
        assert!((ncp - 3.7).abs() < 1e-7, "{ncp}");
        let back = noncentral_f_cdf(2.5, 1, 50, ncp).unwrap();
        assert!(back <= target && target - back <= 1e-10);
    }

    #[test]
    fn noncentral_t_symmetry_at_zero() {
        for m in [1, 4, 30] {
            assert!((noncentral_t_cdf(0.0, m, 0.0).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn central_t_quantile_round_trip() {
        for &(p, m) in &[(0.9, 5u32), (0.975, 30), (0.6, 2), (0.1, 12)] {
            let q = t_quantile(p, m);
            assert!((t_cdf(q, m) - p).abs() < 1e-13);
        }
        // t_{0.975, 30}
        assert!((t_quantile(0.975, 30) - 2.042_272_456_301_238).abs() < 1e-9);
    }

    #[test]
    fn noncentral_f_struct() {
        let law = NoncentralF::new(2, 20, 3.0).unwrap();
        let c = law.cdf(1.7).unwrap();
        assert!((law.sf(1.7).unwrap() + c - 1.0).abs() < 1e-15);
        assert_eq!((law.d1(), law.d2(), law.ncp()), (2, 20, 3.0));
    }
}
