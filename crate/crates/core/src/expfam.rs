//! Family-agnostic Fisher information: canonical information `I(s)`,
//! mean-parameter information `J(m) = V(m)⁻¹` and the reparametrization rule
//! `J̃(t) = f'(t)ᵀ I(f(t)) f'(t)`.
//!
//! Every family lives on `E = S_d` and uses the column-stacking convention
//! for derivatives, so covariances and informations are `d² × d²` matrices.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::matcalc::{Matrix, SymMatrix};

/// Agreement tolerance for the trace condition `⟨m, ψ(m)⟩ = C`.
pub const TRACE_CONDITION_TOL: f64 = 1e-9;

/// A natural or general exponential family on `S_d` described through its
/// cumulant function and the maps derived from it.
pub trait ExponentialFamily: Send + Sync {
    fn name(&self) -> &str;

    /// Matrix dimension `d` of the ambient space `S_d`.
    fn dim(&self) -> usize;

    /// Cumulant `k(s)`.
    fn cumulant(&self, s: &SymMatrix) -> Result<f64>;

    /// Mean map `k'(s)`.
    fn mean_map(&self, s: &SymMatrix) -> Result<SymMatrix>;

    /// Inverse mean map `ψ(m)`.
    fn inverse_mean_map(&self, m: &SymMatrix) -> Result<SymMatrix>;

    /// Variance function `V(m) = k''(ψ(m))`, a `d² × d²` matrix.
    fn variance_function(&self, m: &SymMatrix) -> Result<Matrix>;

    fn in_canonical_domain(&self, s: &SymMatrix) -> bool;

    fn in_mean_domain(&self, m: &SymMatrix) -> bool;

    /// The constant `C` with `⟨m, ψ(m)⟩ = C` on all of `M`, when one exists.
    fn trace_constant(&self) -> Option<f64>;

    /// `+1` when the mean domain is the positive definite cone, `-1` when it
    /// is the negative definite cone.
    fn mean_cone_sign(&self) -> f64;
}

/// Symmetric positive semidefinite `d² × d²` information matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoMatrix(Matrix);

impl InfoMatrix {
    pub fn from_matrix(m: Matrix) -> Self {
        debug_assert!(m.is_square());
        InfoMatrix(m)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// The single entry of a `1 × 1` information.
    pub fn scalar(&self) -> Option<f64> {
        (self.0.shape() == (1, 1)).then(|| self.0[(0, 0)])
    }
}

impl Deref for InfoMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

fn check_square_dim(fam: &dyn ExponentialFamily, x: &SymMatrix) -> Result<()> {
    if x.dim() != fam.dim() {
        return Err(Error::contract(format!(
            "{} family has dimension {}, point has dimension {}",
            fam.name(),
            fam.dim(),
            x.dim()
        )));
    }
    Ok(())
}

/// `I(s) = k''(s) = V(k'(s))`.
pub fn fisher_canonical(fam: &dyn ExponentialFamily, s: &SymMatrix) -> Result<InfoMatrix> {
    check_square_dim(fam, s)?;
    if !fam.in_canonical_domain(s) {
        return Err(Error::domain(format!(
            "s is outside the canonical domain of the {} family",
            fam.name()
        )));
    }
    let m = fam.mean_map(s)?;
    Ok(InfoMatrix(fam.variance_function(&m)?))
}

/// Cholesky factor of `V(m)`, or a conditioning error.
pub(crate) fn variance_cholesky(fam: &dyn ExponentialFamily, m: &SymMatrix) -> Result<crate::matcalc::Cholesky> {
    check_square_dim(fam, m)?;
    if !fam.in_mean_domain(m) {
        return Err(Error::domain(format!(
            "m is outside the mean domain of the {} family",
            fam.name()
        )));
    }
    let v = SymMatrix::symmetrize(fam.variance_function(m)?);
    v.cholesky()
        .map_err(|_| Error::Conditioning("variance function is numerically singular".into()))
}

/// `J(m) = V(m)⁻¹`, inverted through a Cholesky factorization.
pub fn fisher_mean(fam: &dyn ExponentialFamily, m: &SymMatrix) -> Result<InfoMatrix> {
    let chol = variance_cholesky(fam, m)?;
    Ok(InfoMatrix(chol.inverse().into_matrix()))
}

/// `f'(t)ᵀ I(f(t)) f'(t)` for a reparametrization `f` with Jacobian `f'(t)`.
pub fn reparam_info(inner: &InfoMatrix, jacobian: &Matrix) -> Result<InfoMatrix> {
    if inner.rows() != jacobian.rows() {
        return Err(Error::contract(format!(
            "jacobian has {} rows, information has dimension {}",
            jacobian.rows(),
            inner.rows()
        )));
    }
    let out = jacobian.transpose().matmul(inner)?.matmul(jacobian)?;
    Ok(InfoMatrix(SymMatrix::symmetrize(out).into_matrix()))
}

/// Evaluates `⟨m, ψ(m)⟩` on each probe and returns the common value when
/// all probes agree to [`TRACE_CONDITION_TOL`].
pub fn check_trace_condition(fam: &dyn ExponentialFamily, probes: &[SymMatrix]) -> Result<Option<f64>> {
    let mut values = Vec::with_capacity(probes.len());
    for m in probes {
        check_square_dim(fam, m)?;
        if !fam.in_mean_domain(m) {
            return Err(Error::domain("trace-condition probe lies outside the mean domain"));
        }
        values.push(m.inner(fam.inverse_mean_map(m)?.as_matrix())?);
    }
    let Some(&first) = values.first() else {
        return Ok(None);
    };
    let agree = values
        .iter()
        .all(|&c| (c - first).abs() <= TRACE_CONDITION_TOL * first.abs().max(1.0));
    Ok(agree.then_some(first))
}
