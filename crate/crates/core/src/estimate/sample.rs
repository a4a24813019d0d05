//! Samplers for the Gaussian, central Wishart and noncentral Wishart families.
//!
//! The Wishart law `γ(p; σ)` is `W_d(2p, σ/2)` in the usual degrees-of-freedom
//! parametrization. Regular shapes `p > (d-1)/2` use the Bartlett
//! decomposition; singular half-integer shapes sum `2p` Gaussian outer products.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matcalc::{Matrix, SpdMatrix, SymMatrix, PSD_CLAMP_TOL};
use crate::wishart::{gindikin_check, is_half_integer};

fn standard_normals<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `L z` for lower-triangular `L`.
fn lower_apply(l: &Matrix, z: &[f64]) -> Vec<f64> {
    (0..l.rows()).map(|i| (0..=i).map(|k| l[(i, k)] * z[k]).sum()).collect()
}

fn outer_accumulate(acc: &mut Matrix, y: &[f64]) {
    for i in 0..y.len() {
        for j in 0..y.len() {
            acc[(i, j)] += y[i] * y[j];
        }
    }
}

fn half_scale_factor(sigma: &SpdMatrix) -> Matrix {
    sigma.cholesky().factor().scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Draws from `N(u, Σ)` through the Cholesky factor of `Σ`.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    u: Vec<f64>,
    l: Matrix,
}

impl GaussianSampler {
    pub fn new(u: &[f64], sigma: &SpdMatrix) -> Result<Self> {
        if u.len() != sigma.dim() {
            return Err(Error::contract(format!(
                "location has length {}, covariance is {}x{}",
                u.len(),
                sigma.dim(),
                sigma.dim()
            )));
        }
        Ok(GaussianSampler {
            u: u.to_vec(),
            l: sigma.cholesky().factor().clone(),
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z = standard_normals(self.u.len(), rng);
        lower_apply(&self.l, &z)
            .iter()
            .zip(&self.u)
            .map(|(x, m)| x + m)
            .collect()
    }
}

/// `n` i.i.d. draws from `N(u, Σ)`.
pub fn sample_gaussian<R: Rng + ?Sized>(u: &[f64], sigma: &SpdMatrix, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let sampler = GaussianSampler::new(u, sigma)?;
    Ok((0..n).map(|_| sampler.draw(rng)).collect())
}

#[derive(Clone, Debug)]
enum WishartMethod {
    Bartlett { chi: Vec<ChiSquared<f64>> },
    OuterSum { count: usize },
}

/// Draws from the central Wishart law `γ(p; σ)`.
#[derive(Clone, Debug)]
pub struct WishartSampler {
    l: Matrix,
    method: WishartMethod,
}

impl WishartSampler {
    pub fn new(p: f64, sigma: &SpdMatrix) -> Result<Self> {
        let d = sigma.dim();
        if !gindikin_check(d, p) {
            return Err(Error::Admissibility { d, p });
        }
        let dof = 2.0 * p;
        let method = if p > (d as f64 - 1.0) / 2.0 {
            let chi = (0..d)
                .map(|i| ChiSquared::new(dof - i as f64).map_err(|e| Error::contract(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            WishartMethod::Bartlett { chi }
        } else if is_half_integer(p) {
            WishartMethod::OuterSum {
                count: dof.round() as usize,
            }
        } else {
            return Err(Error::Unsupported(format!(
                "cannot sample singular Wishart with 2p = {dof}"
            )));
        };
        Ok(WishartSampler {
            l: half_scale_factor(sigma),
            method,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SymMatrix {
        let d = self.l.rows();
        let mut w = Matrix::zeros(d, d);
        match &self.method {
            WishartMethod::Bartlett { chi } => {
                // W = (L T)(L T)ᵀ with T lower triangular, T_ii² ~ χ²_{2p-i}, T_ij ~ N(0, 1)
                let mut t = Matrix::zeros(d, d);
                for i in 0..d {
                    t[(i, i)] = chi[i].sample(rng).sqrt();
                    for j in 0..i {
                        t[(i, j)] = rng.sample(StandardNormal);
                    }
                }
                let lt = self.l.matmul(&t).expect("square factors");
                w = lt.matmul(&lt.transpose()).expect("square factors");
            }
            WishartMethod::OuterSum { count } => {
                for _ in 0..*count {
                    let y = lower_apply(&self.l, &standard_normals(d, rng));
                    outer_accumulate(&mut w, &y);
                }
            }
        }
        SymMatrix::symmetrize(w)
    }
}

/// `n` i.i.d. draws from `γ(p; σ)`.
pub fn sample_wishart<R: Rng + ?Sized>(p: f64, sigma: &SpdMatrix, n: usize, rng: &mut R) -> Result<Vec<SymMatrix>> {
    let sampler = WishartSampler::new(p, sigma)?;
    Ok((0..n).map(|_| sampler.draw(rng)).collect())
}

/// Draws from the noncentral Wishart law `γ(p, a; σ)` with `2p` an integer,
/// as `Σ_j Y_j Y_jᵀ` with `Y_j ~ N(μ_j, σ/2)` and `Σ_j μ_j μ_jᵀ = σaσ`.
#[derive(Clone, Debug)]
pub struct NcWishartSampler {
    l: Matrix,
    means: Vec<Vec<f64>>,
}

impl NcWishartSampler {
    pub fn new(p: f64, a: &SymMatrix, sigma: &SpdMatrix) -> Result<Self> {
        let d = sigma.dim();
        if a.dim() != d {
            return Err(Error::contract("a and σ have different dimensions"));
        }
        if !is_half_integer(p) || p <= 0.0 {
            return Err(Error::Unsupported(format!(
                "noncentral sampling needs 2p integer, got p = {p}"
            )));
        }
        let count = (2.0 * p).round() as usize;
        let target = sigma.sandwich(a)?;
        let eig = target.eigh()?;
        let tol = PSD_CLAMP_TOL * eig.spectral_norm().max(1.0);
        if eig.values.first().copied().unwrap_or(0.0) < -tol {
            return Err(Error::domain("noncentrality matrix is not positive semidefinite"));
        }
        let mut means = Vec::new();
        for (k, &lambda) in eig.values.iter().enumerate().rev() {
            if lambda > tol {
                let s = lambda.sqrt();
                means.push((0..d).map(|i| s * eig.vectors[(i, k)]).collect::<Vec<f64>>());
            }
        }
        if means.len() > count {
            return Err(Error::Unsupported(format!(
                "noncentrality of rank {} exceeds 2p = {count}",
                means.len()
            )));
        }
        means.resize(count, vec![0.0; d]);
        Ok(NcWishartSampler {
            l: half_scale_factor(sigma),
            means,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SymMatrix {
        let d = self.l.rows();
        let mut w = Matrix::zeros(d, d);
        for mu in &self.means {
            let y: Vec<f64> = lower_apply(&self.l, &standard_normals(d, rng))
                .iter()
                .zip(mu)
                .map(|(x, m)| x + m)
                .collect();
            outer_accumulate(&mut w, &y);
        }
        SymMatrix::symmetrize(w)
    }
}

/// `count` i.i.d. draws from `γ(p, a; σ)`.
pub fn sample_nc_wishart<R: Rng + ?Sized>(
    p: f64,
    a: &SymMatrix,
    sigma: &SpdMatrix,
    count: usize,
    rng: &mut R,
) -> Result<Vec<SymMatrix>> {
    let sampler = NcWishartSampler::new(p, a, sigma)?;
    Ok((0..count).map(|_| sampler.draw(rng)).collect())
}
