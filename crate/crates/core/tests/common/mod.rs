#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use segfisher::{Matrix, SpdMatrix, SymMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(d: usize, rng: &mut R) -> Matrix {
    let data = (0..d * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Matrix::from_row_major(d, d, data).unwrap()
}

pub fn random_sym<R: Rng>(d: usize, rng: &mut R) -> SymMatrix {
    let g = random_matrix(d, rng);
    SymMatrix::symmetrize(g.add(&g.transpose()).unwrap().scale(0.5))
}

/// `G Gᵀ/d + shift·I`, comfortably positive definite.
pub fn random_spd<R: Rng>(d: usize, shift: f64, rng: &mut R) -> SpdMatrix {
    let g = random_matrix(d, rng);
    let m = g
        .matmul(&g.transpose())
        .unwrap()
        .scale(1.0 / d as f64)
        .add(&Matrix::identity(d).scale(shift))
        .unwrap();
    SpdMatrix::new(SymMatrix::symmetrize(m)).unwrap()
}

pub fn sym(rows: &[&[f64]]) -> SymMatrix {
    SymMatrix::new(Matrix::from_rows(rows)).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!(rel(a, b) <= tol, "{a} vs {b}: relative error {} > {tol}", rel(a, b));
}

pub fn max_rel_matrix(a: &Matrix, b: &Matrix) -> f64 {
    a.max_abs_diff(b).unwrap() / b.max_abs().max(1.0)
}

/// Two-sided z band that keeps the family-wise error of a single 3 SE check
/// when `entries` distinct quantities are tested at once. Equals 3 for one entry.
pub fn simultaneous_band(entries: usize) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let single = 2.0 * Normal::standard().cdf(-3.0);
    Normal::standard().inverse_cdf(1.0 - single / (2.0 * entries as f64))
}

/// Distinct entries of the covariance of `vec X` for symmetric `d × d` matrices `X`.
pub fn sym_cov_entries(d: usize) -> usize {
    let q = d * (d + 1) / 2;
    q * (q + 1) / 2
}
