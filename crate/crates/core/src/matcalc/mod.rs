//! Dense matrix calculus: vec, Kronecker products, symmetric
//! eigendecomposition, Cholesky, PSD square roots and log-determinants.

mod eigen;
mod matrix;
mod sym;

pub use eigen::{eigh, Eigen};
pub use matrix::{dot, vec_triple_product, Matrix};
pub use sym::{is_pd, logdet_pd, Cholesky, SpdMatrix, SymMatrix, PSD_CLAMP_TOL, SYMMETRY_TOL};

/// `kron(A, B)`; block `(i, j)` equals `A[i, j]·B`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kron(b)
}

/// Column-stacking vectorization.
pub fn vec(a: &Matrix) -> Vec<f64> {
    a.vec()
}

/// `S^{1/2}` for positive semidefinite `S`.
pub fn sqrt_psd(s: &SymMatrix) -> crate::Result<SymMatrix> {
    s.sqrt_psd()
}
