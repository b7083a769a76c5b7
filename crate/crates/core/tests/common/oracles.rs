//! Quadrature oracles for the noncentral F and t distributions, built on
//! statrs and not on the crate under test.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

pub fn phi(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// Composite Simpson rule with `k` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let h = (b - a) / k as f64;
    let mut s = f(a) + f(b);
    for i in 1..k {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

pub fn chi2_density(w: f64, m: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    ((m / 2.0 - 1.0) * w.ln() - w / 2.0 - (m / 2.0) * 2f64.ln() - ln_gamma(m / 2.0)).exp()
}

/// `E_W[g(W)]` for `W ~ χ²_m`, integrating in `u = √w`.
pub fn chi2_expectation(m: u32, g: impl Fn(f64) -> f64) -> f64 {
    let mf = m as f64;
    let upper = (mf + 60.0 * (2.0 * mf).sqrt() + 80.0).sqrt();
    simpson(|u| 2.0 * u * chi2_density(u * u, mf) * g(u * u), 0.0, upper, 40_000)
}

/// `P(F <= x)` for `F ~ F_{1,m}(λ)`: `(Z+δ)² <= x W/m`.
pub fn ncf1_oracle(x: f64, m: u32, lam: f64) -> f64 {
    let delta = lam.sqrt();
    chi2_expectation(m, |w| {
        let s = (x * w / m as f64).sqrt();
        phi(s - delta) - phi(-s - delta)
    })
}

/// `P(F <= x)` for `F ~ F_{2,m}(λ)`: `((Z1+δ)² + Z2²)/2 <= x W/m`.
pub fn ncf2_oracle(x: f64, m: u32, lam: f64) -> f64 {
    let delta = lam.sqrt();
    chi2_expectation(m, |w| {
        let c = 2.0 * x * w / m as f64;
        let r = c.sqrt();
        let half = std::f64::consts::FRAC_PI_2;
        simpson(
            |t| {
                let z2 = r * t.sin();
                let s = r * t.cos();
                let dens = (-0.5 * z2 * z2).exp() / (2.0 * std::f64::consts::PI).sqrt();
                dens * r * t.cos() * (phi(s - delta) - phi(-s - delta))
            },
            -half,
            half,
            400,
        )
    })
}
