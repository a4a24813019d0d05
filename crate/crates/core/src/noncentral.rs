//! Noncentral Wishart family `γ(p, a; σ)` as a natural exponential family
//! with cumulant `k(s) = -p log det(-s) + tr(a(-s)⁻¹)`.

use crate::error::{Error, Result};
use crate::expfam::ExponentialFamily;
use crate::matcalc::{Matrix, SpdMatrix, SymMatrix, PSD_CLAMP_TOL};
use crate::segment::SegmentModel;
use crate::wishart::{gindikin_check, is_half_integer};

/// Square-root factors of a nonsingular noncentrality matrix.
#[derive(Clone, Debug)]
struct NoncentralityRoots {
    inv: SymMatrix,
    sqrt: SymMatrix,
    inv_sqrt: SymMatrix,
}

impl NoncentralityRoots {
    fn new(a: &SymMatrix) -> Result<Self> {
        let spd = SpdMatrix::new(a.clone())
            .map_err(|_| Error::Unsupported("inverse mean map needs a nonsingular noncentrality matrix".into()))?;
        Ok(NoncentralityRoots {
            inv: spd.inverse(),
            sqrt: a.sqrt_psd()?,
            inv_sqrt: spd.inv_sqrt()?,
        })
    }

    fn inverse_mean(&self, p: f64, m: &SymMatrix) -> Result<SymMatrix> {
        let d = m.dim();
        let inner = self.sqrt.sandwich(m)?.add(&SymMatrix::scalar(d, p * p / 4.0))?;
        let root = inner.sqrt_psd()?;
        self.inv.scale(-p / 2.0).add(&self.inv_sqrt.sandwich(&root)?)
    }
}

/// Numerical rank of a PSD matrix.
fn psd_rank(a: &SymMatrix) -> Result<usize> {
    let eig = a.eigh()?;
    let norm = eig.spectral_norm();
    if eig.values.first().copied().unwrap_or(0.0) < -PSD_CLAMP_TOL * norm.max(1.0) {
        return Err(Error::domain("noncentrality matrix is not positive semidefinite"));
    }
    let tol = PSD_CLAMP_TOL * norm.max(1.0);
    Ok(eig.values.iter().filter(|&&l| l > tol).count())
}

#[derive(Clone, Debug)]
pub struct NcWishartFamily {
    d: usize,
    p: f64,
    a: SymMatrix,
    roots: Option<NoncentralityRoots>,
}

impl NcWishartFamily {
    /// `a` must be PSD; for `2p` an integer below `d - 1`, its rank may not exceed `2p`.
    pub fn new(p: f64, a: SymMatrix) -> Result<Self> {
        let d = a.dim();
        if !gindikin_check(d, p) {
            return Err(Error::Admissibility { d, p });
        }
        let rank = psd_rank(&a)?;
        if is_half_integer(p) && 2.0 * p < d as f64 - 1.0 && rank as f64 > 2.0 * p {
            return Err(Error::Unsupported(format!(
                "noncentrality of rank {rank} exceeds 2p = {} for d = {d}",
                2.0 * p
            )));
        }
        let roots = (rank == d).then(|| NoncentralityRoots::new(&a)).transpose()?;
        Ok(NcWishartFamily { d, p, a, roots })
    }

    pub fn shape(&self) -> f64 {
        self.p
    }

    pub fn noncentrality(&self) -> &SymMatrix {
        &self.a
    }

    fn roots(&self) -> Result<&NoncentralityRoots> {
        self.roots
            .as_ref()
            .ok_or_else(|| Error::Unsupported("inverse mean map needs a nonsingular noncentrality matrix".into()))
    }

    /// Scale `σ = (-ψ(m))⁻¹` for a mean `m`.
    pub fn scale_for_mean(&self, m: &SymMatrix) -> Result<SpdMatrix> {
        if !m.is_pd() {
            return Err(Error::domain("mean is not positive definite"));
        }
        let sigma = self.roots()?.inverse_mean(self.p, m)?;
        SpdMatrix::new(sigma).map_err(|_| Error::Conditioning("recovered scale is not positive definite".into()))
    }
}

fn neg_spd(s: &SymMatrix) -> Result<SpdMatrix> {
    SpdMatrix::new(s.scale(-1.0)).map_err(|_| Error::domain("-s is not positive definite"))
}

impl ExponentialFamily for NcWishartFamily {
    fn name(&self) -> &str {
        "ncwishart"
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn cumulant(&self, s: &SymMatrix) -> Result<f64> {
        let neg = neg_spd(s)?;
        let sigma = neg.inverse();
        Ok(-self.p * neg.logdet() + self.a.inner(&sigma)?)
    }

    fn mean_map(&self, s: &SymMatrix) -> Result<SymMatrix> {
        let sigma = SpdMatrix::new(neg_spd(s)?.inverse())?;
        nc_mean(self.p, &self.a, &sigma)
    }

    fn inverse_mean_map(&self, m: &SymMatrix) -> Result<SymMatrix> {
        Ok(self.scale_for_mean(m)?.inverse().scale(-1.0))
    }

    fn variance_function(&self, m: &SymMatrix) -> Result<Matrix> {
        let sigma = self.scale_for_mean(m)?;
        nc_covariance(self.p, &self.a, &sigma)
    }

    fn in_canonical_domain(&self, s: &SymMatrix) -> bool {
        s.scale(-1.0).is_pd()
    }

    fn in_mean_domain(&self, m: &SymMatrix) -> bool {
        m.is_pd()
    }

    fn trace_constant(&self) -> Option<f64> {
        None
    }

    fn mean_cone_sign(&self) -> f64 {
        1.0
    }
}

/// `m = pσ + σaσ`.
pub fn nc_mean(p: f64, a: &SymMatrix, sigma: &SpdMatrix) -> Result<SymMatrix> {
    sigma.scale(p).add(&sigma.sandwich(a)?)
}

/// `pσ⊗σ + (σaσ)⊗σ + σ⊗(σaσ)`.
pub fn nc_covariance(p: f64, a: &SymMatrix, sigma: &SpdMatrix) -> Result<Matrix> {
    let sas = sigma.sandwich(a)?;
    let central = sigma.kron(sigma).scale(p);
    central.add(&sas.kron(sigma))?.add(&sigma.kron(&sas))
}

/// `σ = -(p/2)a⁻¹ + a^{-1/2}(a^{1/2} m a^{1/2} + (p²/4)I)^{1/2} a^{-1/2}`.
pub fn nc_inverse_mean(p: f64, a: &SymMatrix, m: &SymMatrix) -> Result<SpdMatrix> {
    if a.dim() != m.dim() {
        return Err(Error::contract("a and m have different dimensions"));
    }
    if !m.is_pd() {
        return Err(Error::domain("mean is not positive definite"));
    }
    let sigma = NoncentralityRoots::new(a)?.inverse_mean(p, m)?;
    SpdMatrix::new(sigma).map_err(|_| Error::Conditioning("recovered scale is not positive definite".into()))
}

/// `vec(A)ᵀ V(θA + B)⁻¹ vec(A)` for the noncentral family.
pub fn nc_segment_info(p: f64, a: &SymMatrix, dir: &SymMatrix, offset: &SymMatrix, theta: f64) -> Result<f64> {
    let family = NcWishartFamily::new(p, a.clone())?;
    let seg = SegmentModel::new(std::sync::Arc::new(family), dir.clone(), offset.clone(), theta)?;
    seg.info_quadratic(theta)
}

/// Closed form for `a = I_d`, `A = αI_d`, `B = βI_d`:
/// `α²d[(p² + 2μ)(μ + p²/4)^{1/2} - 2pμ - p³/2]⁻¹`, `μ = θα + β`.
pub fn nc_isotropic_info(p: f64, d: usize, alpha: f64, beta: f64, theta: f64) -> Result<f64> {
    let mu = theta * alpha + beta;
    if !(mu > 0.0) {
        return Err(Error::domain(format!("θα + β = {mu} must be positive")));
    }
    let denom = (p * p + 2.0 * mu) * (mu + p * p / 4.0).sqrt() - 2.0 * p * mu - p.powi(3) / 2.0;
    Ok(alpha * alpha * d as f64 / denom)
}
