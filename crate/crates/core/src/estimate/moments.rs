//! Scalar and vector moment summaries with plug-in standard errors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcalc::Matrix;

/// Sample mean and variance of a scalar series, each with a standard error.
///
/// The variance uses the `n - 1` divisor. Its standard error is the
/// fourth-moment plug-in `√((m₄ - s⁴)/n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarMoments {
    pub count: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

impl ScalarMoments {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::contract("moment summary needs at least two samples"));
        }
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
        let variance = m2 * nf / (nf - 1.0);
        Ok(ScalarMoments {
            count: n,
            mean,
            mean_se: (variance / nf).sqrt(),
            variance,
            variance_se: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        })
    }

    /// `|mean - target| ≤ k·SE`.
    pub fn mean_within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.mean_se
    }

    /// `|variance - target| ≤ k·SE`.
    pub fn variance_within(&self, target: f64, k: f64) -> bool {
        (self.variance - target).abs() <= k * self.variance_se
    }
}

/// Entrywise covariance of vector samples with plug-in standard errors,
/// together with the mean vector and its standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorMoments {
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub covariance: Matrix,
    pub covariance_se: Matrix,
}

impl VectorMoments {
    pub fn from_samples(xs: &[Vec<f64>]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::contract("moment summary needs at least two samples"));
        }
        let k = xs[0].len();
        if xs.iter().any(|x| x.len() != k) {
            return Err(Error::contract("samples have different lengths"));
        }
        let nf = n as f64;
        let mut mean = vec![0.0; k];
        for x in xs {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut s1 = Matrix::zeros(k, k);
        let mut s2 = Matrix::zeros(k, k);
        let mut centered = vec![0.0; k];
        for x in xs {
            for i in 0..k {
                centered[i] = x[i] - mean[i];
            }
            for i in 0..k {
                for j in 0..k {
                    let prod = centered[i] * centered[j];
                    s1[(i, j)] += prod;
                    s2[(i, j)] += prod * prod;
                }
            }
        }
        let mut covariance = Matrix::zeros(k, k);
        let mut covariance_se = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let c = s1[(i, j)] / nf;
                covariance[(i, j)] = c * nf / (nf - 1.0);
                covariance_se[(i, j)] = ((s2[(i, j)] / nf - c * c).max(0.0) / nf).sqrt();
            }
        }
        let mean_se = (0..k).map(|i| (covariance[(i, i)] / nf).sqrt()).collect();
        Ok(VectorMoments {
            mean,
            mean_se,
            covariance,
            covariance_se,
        })
    }

    /// Largest `|cov_ij - target_ij| / se_ij` over all entries, with a tiny
    /// floor on the standard error for entries that are exactly zero.
    pub fn covariance_z(&self, target: &Matrix) -> Result<f64> {
        let diff = self.covariance.sub(target)?;
        let floor = 1e-12 * self.covariance.max_abs().max(1e-300);
        let (k, _) = diff.shape();
        let mut worst = 0.0_f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max(diff[(i, j)].abs() / self.covariance_se[(i, j)].max(floor));
            }
        }
        Ok(worst)
    }

    /// Largest `|mean_i - target_i| / se_i`.
    pub fn mean_z(&self, target: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(target)
            .zip(&self.mean_se)
            .map(|((m, t), se)| (m - t).abs() / se.max(1e-300))
            .fold(0.0, f64::max)
    }
}

/// `½(I + K) M ½(I + K)` with `K` the commutation matrix on `d × d` matrices:
/// the part of a `d² × d²` operator that acts on symmetric directions. The
/// covariance of `vec X` for a symmetric random `X` always has this form.
pub fn symmetric_part(m: &Matrix, d: usize) -> Result<Matrix> {
    if m.shape() != (d * d, d * d) {
        return Err(Error::contract("operator must be d² × d²"));
    }
    let k = commutation(d);
    let p = Matrix::identity(d * d).add(&k)?.scale(0.5);
    p.matmul(m)?.matmul(&p)
}

/// Commutation matrix `K` with `K vec(X) = vec(Xᵀ)`.
pub fn commutation(d: usize) -> Matrix {
    let mut k = Matrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            k[(i * d + j, j * d + i)] = 1.0;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_moments_of_small_series() {
        let m = ScalarMoments::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(ScalarMoments::from_samples(&[1.0]).is_err());
    }

    #[test]
    fn commutation_transposes() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(commutation(2).mat_vec(&x.vec()).unwrap(), x.transpose().vec());
    }
}
