use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::eigen::{eigh, Eigen};
use super::matrix::{Matrix, MatrixJson};
use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative tolerance below which negative eigenvalues are clamped to zero.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

/// Real symmetric matrix, stored dense and canonically symmetrized.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct SymMatrix(Matrix);

impl TryFrom<MatrixJson> for SymMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        SymMatrix::new(Matrix::try_from(json)?)
    }
}

impl From<SymMatrix> for MatrixJson {
    fn from(s: SymMatrix) -> Self {
        s.0.into()
    }
}

impl Deref for SymMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl SymMatrix {
    /// Accepts `m` if it is square and symmetric to within [`SYMMETRY_TOL`]
    /// (relative to its largest entry), then stores `(m + mᵀ)/2`.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Input(format!(
                "symmetric matrix must be square, got {:?}",
                m.shape()
            )));
        }
        let scale = m.max_abs().max(1.0);
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Input(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetrizes a square matrix without checking how far from symmetric it was.
    pub fn symmetrize(mut m: Matrix) -> Self {
        assert!(m.is_square(), "symmetrize needs a square matrix");
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn identity(d: usize) -> Self {
        SymMatrix(Matrix::identity(d))
    }

    pub fn zeros(d: usize) -> Self {
        SymMatrix(Matrix::zeros(d, d))
    }

    pub fn diag(values: &[f64]) -> Self {
        SymMatrix(Matrix::diag(values))
    }

    pub fn scalar(d: usize, c: f64) -> Self {
        SymMatrix(Matrix::identity(d).scale(c))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    fn check_dim(&self, rhs: &SymMatrix) -> Result<()> {
        if self.dim() != rhs.dim() {
            return Err(Error::contract(format!(
                "dimension mismatch {} vs {}",
                self.dim(),
                rhs.dim()
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(rhs)?;
        Ok(SymMatrix(self.0.add(&rhs.0)?))
    }

    pub fn sub(&self, rhs: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(rhs)?;
        Ok(SymMatrix(self.0.sub(&rhs.0)?))
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix(self.0.scale(c))
    }

    /// `θ·self + offset`, the point of a segment.
    pub fn affine(&self, theta: f64, offset: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(offset)?;
        Ok(SymMatrix(self.0.axpy(theta, &offset.0)?))
    }

    /// `self · middle · self`, symmetric whenever both factors are.
    pub fn sandwich(&self, middle: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(middle)?;
        let prod = self.0.matmul(&middle.0)?.matmul(&self.0)?;
        Ok(SymMatrix::symmetrize(prod))
    }

    pub fn is_zero(&self) -> bool {
        self.0.max_abs() == 0.0
    }

    pub fn eigh(&self) -> Result<Eigen> {
        eigh(self)
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::new(self)
    }

    /// True iff a Cholesky factorization succeeds.
    pub fn is_pd(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Applies `f` to the eigenvalues: `Q diag(f(λ)) Qᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let eig = self.eigh()?;
        Ok(eig.reassemble(eig.values.iter().map(|&l| f(l))))
    }

    /// Principal square root of a positive semidefinite matrix.
    ///
    /// Eigenvalues down to `-1e-10·‖S‖` are clamped to zero; anything more
    /// negative is a domain error.
    pub fn sqrt_psd(&self) -> Result<SymMatrix> {
        let eig = self.eigh()?;
        let norm = eig.spectral_norm();
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -PSD_CLAMP_TOL * norm {
            return Err(Error::domain(format!("matrix has negative eigenvalue {min:e}")));
        }
        Ok(eig.reassemble(eig.values.iter().map(|&l| l.max(0.0).sqrt())))
    }
}

/// Lower-triangular Cholesky factor `S = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(s: &SymMatrix) -> Result<Self> {
        let n = s.dim();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = s[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut v = s[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// `2 Σ log L_ii`.
    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::contract("right-hand side length mismatch"));
        }
        let l = &self.l;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut v = y[i];
            for k in 0..i {
                v -= l[(i, k)] * y[k];
            }
            y[i] = v / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in (i + 1)..n {
                v -= l[(k, i)] * y[k];
            }
            y[i] = v / l[(i, i)];
        }
        Ok(y)
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension checked");
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        SymMatrix::symmetrize(inv)
    }
}

/// Symmetric positive definite matrix, certified by a successful Cholesky factorization.
#[derive(Clone, Debug)]
pub struct SpdMatrix {
    base: SymMatrix,
    chol: Cholesky,
}

impl SpdMatrix {
    pub fn new(base: SymMatrix) -> Result<Self> {
        let chol = base.cholesky()?;
        Ok(SpdMatrix { base, chol })
    }

    pub fn identity(d: usize) -> Self {
        SpdMatrix::new(SymMatrix::identity(d)).expect("identity is PD")
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.base
    }

    pub fn into_sym(self) -> SymMatrix {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn logdet(&self) -> f64 {
        self.chol.logdet()
    }

    pub fn inverse(&self) -> SymMatrix {
        self.chol.inverse()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.chol.solve(b)
    }

    /// Symmetric inverse square root `S^{-1/2}`.
    pub fn inv_sqrt(&self) -> Result<SymMatrix> {
        self.base.map_spectrum(|l| 1.0 / l.sqrt())
    }
}

impl Deref for SpdMatrix {
    type Target = SymMatrix;

    fn deref(&self) -> &SymMatrix {
        &self.base
    }
}

/// `log det S` for a positive definite `S`, via its Cholesky factor.
pub fn logdet_pd(s: &SpdMatrix) -> f64 {
    s.logdet()
}

pub fn is_pd(s: &SymMatrix) -> bool {
    s.is_pd()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_within_tolerance() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.0 + 1e-14, 3.0]]);
        let s = SymMatrix::new(m).unwrap();
        assert_eq!(s[(0, 1)], s[(1, 0)]);
        let bad = Matrix::from_rows(&[[1.0, 2.0], [2.5, 3.0]]);
        assert!(SymMatrix::new(bad).is_err());
        assert!(SymMatrix::new(Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn pd_checks() {
        assert!(is_pd(&SymMatrix::identity(2)));
        assert!(!is_pd(&SymMatrix::identity(2).scale(-1.0)));
        assert!(!is_pd(&SymMatrix::zeros(2)));
    }

    #[test]
    fn logdet_small_cases() {
        assert_eq!(logdet_pd(&SpdMatrix::identity(4)), 0.0);
        let s = SpdMatrix::new(SymMatrix::diag(&[2.0, 8.0])).unwrap();
        assert!((logdet_pd(&s) - 16f64.ln()).abs() < 1e-14);
        assert_eq!(
            SpdMatrix::new(SymMatrix::diag(&[1.0, -1.0])).unwrap_err(),
            Error::NotPositiveDefinite
        );
    }

    #[test]
    fn sqrt_of_diagonal() {
        assert_eq!(SymMatrix::identity(3).sqrt_psd().unwrap(), SymMatrix::identity(3));
        let r = SymMatrix::diag(&[4.0, 9.0]).sqrt_psd().unwrap();
        assert!(r.max_abs_diff(&SymMatrix::diag(&[2.0, 3.0])).unwrap() < 1e-14);
        assert!(SymMatrix::diag(&[1.0, -0.5]).sqrt_psd().is_err());
        // tiny negative eigenvalue is clamped
        let r = SymMatrix::diag(&[1.0, -1e-13]).sqrt_psd().unwrap();
        assert_eq!(r[(1, 1)], 0.0);
    }

    #[test]
    fn cholesky_inverse() {
        let s = SymMatrix::new(Matrix::from_rows(&[[4.0, 1.0], [1.0, 3.0]])).unwrap();
        let spd = SpdMatrix::new(s.clone()).unwrap();
        let prod = s.matmul(&spd.inverse()).unwrap();
        assert!(prod.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-14);
    }
}
