//! Central Wishart family generated by the Riesz measure `μ_p`.
//!
//! Canonical `s ∈ -S_d⁺`, scale `σ = (-s)⁻¹`, mean `m = pσ ∈ S_d⁺`.
//! The scale segment `σ = θC + D` is the mean segment `A = pC, B = pD`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expfam::ExponentialFamily;
use crate::gaussian::{
    circulant_spectrum, eigen_sum, logdet_curvature, trace_quadratic, tridiagonal_spectrum, CovSegment,
};
use crate::matcalc::{Matrix, SpdMatrix, SymMatrix};
use crate::segment::{segment_spectrum, SegmentModel};

/// Segment `θ ↦ θC + D` of scale parameters.
pub type ScaleSegment = CovSegment;

const HALF_INTEGER_TOL: f64 = 1e-12;

/// Whether `2p` is (numerically) an integer.
pub fn is_half_integer(p: f64) -> bool {
    ((2.0 * p) - (2.0 * p).round()).abs() <= HALF_INTEGER_TOL
}

/// Membership of `p` in the Gindikin set `{½, 1, …, (d-1)/2} ∪ ((d-1)/2, ∞)`.
pub fn gindikin_check(d: usize, p: f64) -> bool {
    if !(p > 0.0) || !p.is_finite() || d == 0 {
        return false;
    }
    let half = (d as f64 - 1.0) / 2.0;
    if p > half {
        return true;
    }
    let twice = (2.0 * p).round();
    is_half_integer(p) && twice >= 1.0 && twice <= d as f64 - 1.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct WishartFamily {
    d: usize,
    p: f64,
}

impl WishartFamily {
    pub fn new(d: usize, p: f64) -> Result<Self> {
        if !gindikin_check(d, p) {
            return Err(Error::Admissibility { d, p });
        }
        Ok(WishartFamily { d, p })
    }

    pub fn shape(&self) -> f64 {
        self.p
    }

    /// Absolutely continuous (`p > (d-1)/2`) rather than concentrated on rank-`2p` matrices.
    pub fn is_regular(&self) -> bool {
        self.p > (self.d as f64 - 1.0) / 2.0
    }

    /// Scale segment as a mean segment: `A = pC`, `B = pD`.
    pub fn mean_segment(self: &Arc<Self>, seg: &ScaleSegment) -> Result<SegmentModel> {
        SegmentModel::new(self.clone(), seg.c().scale(self.p), seg.d().scale(self.p), seg.theta0())
    }
}

/// `wishart_family(d, p)` constructor.
pub fn wishart_family(d: usize, p: f64) -> Result<WishartFamily> {
    WishartFamily::new(d, p)
}

fn spd(x: &SymMatrix, what: &str) -> Result<SpdMatrix> {
    SpdMatrix::new(x.clone()).map_err(|_| Error::domain(format!("{what} is not positive definite")))
}

impl ExponentialFamily for WishartFamily {
    fn name(&self) -> &str {
        "wishart"
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn cumulant(&self, s: &SymMatrix) -> Result<f64> {
        Ok(-self.p * spd(&s.scale(-1.0), "-s")?.logdet())
    }

    fn mean_map(&self, s: &SymMatrix) -> Result<SymMatrix> {
        Ok(spd(&s.scale(-1.0), "-s")?.inverse().scale(self.p))
    }

    fn inverse_mean_map(&self, m: &SymMatrix) -> Result<SymMatrix> {
        Ok(spd(m, "m")?.inverse().scale(-self.p))
    }

    fn variance_function(&self, m: &SymMatrix) -> Result<Matrix> {
        Ok(m.kron(m).scale(1.0 / self.p))
    }

    fn in_canonical_domain(&self, s: &SymMatrix) -> bool {
        s.scale(-1.0).is_pd()
    }

    fn in_mean_domain(&self, m: &SymMatrix) -> bool {
        m.is_pd()
    }

    fn trace_constant(&self) -> Option<f64> {
        Some(-self.p * self.d as f64)
    }

    fn mean_cone_sign(&self) -> f64 {
        1.0
    }
}

fn check_shape(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::contract(format!("shape parameter must be positive, got {p}")));
    }
    Ok(())
}

/// `J(θ) = p·tr((C(θC + D)⁻¹)²)` for `{γ(p; θC + D)}`.
pub fn wishart_segment_info(p: f64, c: &SymMatrix, d: &SymMatrix, theta: f64) -> Result<f64> {
    check_shape(p)?;
    Ok(p * trace_quadratic(c, d, theta)?)
}

/// `J(θ) = -p d²/dθ² log det(θC + D)`.
pub fn wishart_segment_info_logdet(p: f64, c: &SymMatrix, d: &SymMatrix, theta: f64) -> Result<f64> {
    check_shape(p)?;
    Ok(-p * logdet_curvature(c, d, theta)?)
}

/// `J(θ) = p Σ (a_j / (1 + a_j θ))²`.
pub fn wishart_segment_info_eigen(p: f64, c: &SymMatrix, d: &SpdMatrix, theta: f64) -> Result<f64> {
    check_shape(p)?;
    Ok(p * eigen_sum(&segment_spectrum(c, d)?, theta)?)
}

/// `J(θ) = p·tr(((σ₁ - σ₂) σ_θ⁻¹)²)` with `σ_θ = θσ₁ + (1 - θ)σ₂`.
pub fn wishart_two_scale_info(p: f64, sigma1: &SpdMatrix, sigma2: &SpdMatrix, theta: f64) -> Result<f64> {
    check_shape(p)?;
    if sigma1.dim() != sigma2.dim() {
        return Err(Error::contract("scale matrices have different dimensions"));
    }
    let diff = sigma1.sub(sigma2)?;
    if diff.is_zero() {
        return Err(Error::contract("σ₁ = σ₂ gives a zero segment direction"));
    }
    let mixed = sigma1.scale(theta).add(&sigma2.scale(1.0 - theta))?;
    let mixed = spd(&mixed, "σ_θ")?;
    let x = diff.matmul(&mixed.inverse())?;
    Ok(p * x.matmul(&x)?.trace())
}

/// `p Σ_j (2cos(2πj/d) / (1 + 2θcos(2πj/d)))²`.
pub fn wishart_circulant_info(p: f64, d: usize, theta: f64) -> Result<f64> {
    check_shape(p)?;
    if d < 3 {
        return Err(Error::contract(format!("circulant direction needs d >= 3, got {d}")));
    }
    Ok(p * eigen_sum(&circulant_spectrum(d), theta)?)
}

/// `p Σ_j (2cos(jπ/(d+1)) / (1 + 2θcos(jπ/(d+1))))²`.
pub fn wishart_tridiag_info(p: f64, d: usize, theta: f64) -> Result<f64> {
    check_shape(p)?;
    if d < 2 {
        return Err(Error::contract(format!("tridiagonal direction needs d >= 2, got {d}")));
    }
    Ok(p * eigen_sum(&tridiagonal_spectrum(d), theta)?)
}
