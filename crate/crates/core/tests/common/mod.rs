#![allow(dead_code)]

pub mod oracles;

use fric::{Dataset, Subset};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Intercept plus `p - 1` correlated covariates on varied scales, with a
/// response from a random truth.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let mut cov = DMatrix::from_vec(n, p - 1, normals(rng, n * (p - 1)));
    for j in 1..p - 1 {
        let mix: f64 = rng.random_range(-0.8..0.8);
        for i in 0..n {
            cov[(i, j)] += mix * cov[(i, j - 1)];
        }
    }
    for j in 0..p - 1 {
        let scale: f64 = rng.random_range(0.2..20.0);
        let shift: f64 = rng.random_range(-5.0..5.0);
        for i in 0..n {
            cov[(i, j)] = shift + scale * cov[(i, j)];
        }
    }
    let beta = DVector::from_vec(normals(rng, p));
    let noise = DVector::from_vec(normals(rng, n));
    let mut x = DMatrix::from_element(n, p, 1.0);
    x.view_mut((0, 1), (n, p - 1)).copy_from(&cov);
    let y = &x * beta + noise;
    let names = (1..p).map(|j| format!("x{j}")).collect();
    Dataset::with_intercept(cov, y, names).unwrap()
}

/// Random subset containing the intercept.
pub fn random_subset(rng: &mut ChaCha8Rng, p: usize) -> Subset {
    let mut mask: Vec<bool> = (0..p).map(|_| rng.random_bool(0.5)).collect();
    mask[0] = true;
    Subset::from_mask(&mask)
}

/// Random subset containing the intercept and missing at least one column.
pub fn random_proper_subset(rng: &mut ChaCha8Rng, p: usize) -> Subset {
    loop {
        let s = random_subset(rng, p);
        if !s.is_full() {
            return s;
        }
    }
}

/// Design with `Σ_n = I`: an all-ones column and `p - 1` centred,
/// mutually orthogonal columns of squared norm `n`.
pub fn orthonormal_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    let mut z = DMatrix::from_vec(n, p, normals(rng, n * p));
    z.column_mut(0).fill(1.0);
    let q = z.qr().q();
    let mut x = q * (n as f64).sqrt();
    if x[(0, 0)] < 0.0 {
        x.column_mut(0).neg_mut();
    }
    x.column_mut(0).fill(1.0);
    x
}

/// Orthonormal design with response `Xβ + ε`, intercept forced.
pub fn orthonormal_dataset(r: &mut ChaCha8Rng, n: usize, p: usize, beta: &[f64]) -> Dataset {
    let x = orthonormal_design(r, n, p);
    let y = &x * DVector::from_column_slice(beta) + DVector::from_vec(normals(r, n));
    let mut names = vec!["intercept".to_string()];
    names.extend((1..p).map(|j| format!("x{j}")));
    let mut forced = vec![false; p];
    forced[0] = true;
    Dataset::new(x, y, names, forced).unwrap()
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
