//! Segment estimators `θ̂_C = ⟨X̄ₙ - B, C⟩ / ⟨A, C⟩`, their exact variance
//! and the Cramér–Rao bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcalc::{Matrix, SymMatrix};
use crate::segment::SegmentModel;

/// `⟨A, C⟩` below this fraction of `‖A‖‖C‖` is treated as zero.
const ORTHOGONALITY_TOL: f64 = 1e-12;

fn pairing(a: &SymMatrix, c: &SymMatrix) -> Result<f64> {
    let ac = a.inner(c)?;
    if ac.abs() <= ORTHOGONALITY_TOL * a.norm_fro() * c.norm_fro() {
        return Err(Error::contract("⟨A, C⟩ = 0: the estimator is undefined"));
    }
    Ok(ac)
}

/// `⟨X̄ - B, C⟩ / ⟨A, C⟩` from the sample mean of the sufficient statistic.
pub fn theta_hat(c: &SymMatrix, a: &SymMatrix, b: &SymMatrix, mean_stat: &SymMatrix) -> Result<f64> {
    let ac = pairing(a, c)?;
    Ok(mean_stat.sub(b)?.inner(c)? / ac)
}

/// Average of a non-empty list of symmetric matrices.
pub fn sample_mean(samples: &[SymMatrix]) -> Result<SymMatrix> {
    let first = samples.first().ok_or_else(|| Error::contract("empty sample"))?;
    let mut acc = Matrix::zeros(first.dim(), first.dim());
    for x in samples {
        acc = acc.add(x)?;
    }
    Ok(SymMatrix::symmetrize(acc.scale(1.0 / samples.len() as f64)))
}

/// `θ̂_C` computed from raw sufficient statistics.
pub fn theta_hat_from_samples(c: &SymMatrix, a: &SymMatrix, b: &SymMatrix, samples: &[SymMatrix]) -> Result<f64> {
    theta_hat(c, a, b, &sample_mean(samples)?)
}

/// Inverse of a nonsingular symmetric matrix through its spectrum.
pub fn sym_inverse(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = a.eigh()?;
    let tol = 1e-12 * eig.spectral_norm();
    if eig.values.iter().any(|l| l.abs() <= tol) {
        return Err(Error::contract("A is singular, A⁻¹ is undefined"));
    }
    Ok(eig.reassemble(eig.values.iter().map(|l| 1.0 / l)))
}

/// Choice of the matrix `C` in `θ̂_C`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EstimatorJson", into = "EstimatorJson")]
pub enum EstimatorChoice {
    #[default]
    InverseA,
    Matrix(SymMatrix),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EstimatorJson {
    Name(String),
    Matrix(SymMatrix),
}

impl TryFrom<EstimatorJson> for EstimatorChoice {
    type Error = Error;

    fn try_from(json: EstimatorJson) -> Result<Self> {
        match json {
            EstimatorJson::Name(name) if name == "inverseA" => Ok(EstimatorChoice::InverseA),
            EstimatorJson::Name(name) => Err(Error::Input(format!("unknown estimator \"{name}\""))),
            EstimatorJson::Matrix(m) => Ok(EstimatorChoice::Matrix(m)),
        }
    }
}

impl From<EstimatorChoice> for EstimatorJson {
    fn from(e: EstimatorChoice) -> Self {
        match e {
            EstimatorChoice::InverseA => EstimatorJson::Name("inverseA".into()),
            EstimatorChoice::Matrix(m) => EstimatorJson::Matrix(m),
        }
    }
}

impl EstimatorChoice {
    /// The matrix `C` for the segment direction `a`.
    pub fn resolve(&self, a: &SymMatrix) -> Result<SymMatrix> {
        let c = match self {
            EstimatorChoice::InverseA => sym_inverse(a)?,
            EstimatorChoice::Matrix(c) => {
                if c.dim() != a.dim() {
                    return Err(Error::contract("estimator matrix has the wrong dimension"));
                }
                c.clone()
            }
        };
        pairing(a, &c)?;
        Ok(c)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::contract("sample size must be positive"));
    }
    Ok(())
}

/// `Var θ̂_C = vec(C)ᵀ V(θA + B) vec(C) / (n ⟨A, C⟩²)`.
pub fn theta_hat_variance(seg: &SegmentModel, c: &SymMatrix, theta: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    let ac = pairing(seg.direction(), c)?;
    let m = seg.point(theta)?;
    let fam = seg.family();
    if !theta.is_finite() || !fam.in_mean_domain(&m) {
        return Err(Error::domain(format!("θ = {theta} is outside the segment domain")));
    }
    let vc = c.vec();
    let quad = fam.variance_function(&m)?.bilinear(&vc, &vc)?;
    Ok(quad / (n as f64 * ac * ac))
}

/// `1 / (n J(θ))`.
pub fn cramer_rao_bound(seg: &SegmentModel, theta: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    Ok(1.0 / (n as f64 * seg.info_quadratic(theta)?))
}

/// The two sides of `tr(D_θ)/d² = 1/tr(D_θ⁻¹)` with `D_θ = (θA + B)A⁻¹(θA + B)A⁻¹`;
/// `θ̂_{A⁻¹}` is efficient exactly when they coincide.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceDiagnostic {
    pub trace_over_d2: f64,
    pub inverse_trace_reciprocal: f64,
}

pub fn trace_diagnostic(a: &SymMatrix, b: &SymMatrix, theta: f64) -> Result<TraceDiagnostic> {
    let m = a.affine(theta, b)?;
    let a_inv = sym_inverse(a)?;
    let m_inv = sym_inverse(&m)?;
    let x = m.matmul(&a_inv)?;
    let y = a.matmul(&m_inv)?;
    let d = a.dim() as f64;
    Ok(TraceDiagnostic {
        trace_over_d2: x.matmul(&x)?.trace() / (d * d),
        inverse_trace_reciprocal: 1.0 / y.matmul(&y)?.trace(),
    })
}

/// The `c` with `B = cA`, when `B` is collinear with `A`.
pub fn collinear_offset(a: &SymMatrix, b: &SymMatrix) -> Option<f64> {
    let aa = a.inner(a).ok()?;
    let c = a.inner(b).ok()? / aa;
    let resid = b.sub(&a.scale(c)).ok()?.norm_fro();
    (resid <= 1e-12 * b.norm_fro().max(a.norm_fro())).then_some(c)
}
