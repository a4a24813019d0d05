//! Submodels parametrized by a segment of means `θ ↦ θA + B`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expfam::{variance_cholesky, ExponentialFamily};
use crate::fd;
use crate::matcalc::{dot, SpdMatrix, SymMatrix};

/// Eigenvalues smaller than this (relative to `max(1, max|λ|)`) never bound the interval.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-12;

/// Open interval of admissible segment parameters; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ThetaInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::contract(format!("empty interval ({lower}, {upper})")));
        }
        Ok(ThetaInterval { lower, upper })
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta > self.lower && theta < self.upper
    }

    /// Distance from `theta` to the nearest finite endpoint.
    pub fn distance_to_boundary(&self, theta: f64) -> f64 {
        (theta - self.lower).min(self.upper - theta)
    }

    /// The interval of `t` with `1 + t·λ_j > 0` for every `λ_j`, shifted by `anchor`.
    pub fn from_anchored_spectrum(anchor: f64, spectrum: &[f64]) -> Self {
        let scale = spectrum.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
        let tol = ZERO_EIGENVALUE_TOL * scale;
        let largest_positive = spectrum.iter().copied().filter(|&l| l > tol).fold(f64::NAN, f64::max);
        let most_negative = spectrum.iter().copied().filter(|&l| l < -tol).fold(f64::NAN, f64::min);
        let lower = if largest_positive.is_nan() {
            f64::NEG_INFINITY
        } else {
            anchor - 1.0 / largest_positive
        };
        let upper = if most_negative.is_nan() {
            f64::INFINITY
        } else {
            anchor - 1.0 / most_negative
        };
        ThetaInterval { lower, upper }
    }
}

impl fmt::Display for ThetaInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |x: f64| {
            if x == f64::INFINITY {
                "+inf".to_string()
            } else if x == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{x}")
            }
        };
        write!(f, "({}, {})", end(self.lower), end(self.upper))
    }
}

/// Ascending eigenvalues of `D^{-1/2} C D^{-1/2}`.
pub fn segment_spectrum(c: &SymMatrix, d: &SpdMatrix) -> Result<Vec<f64>> {
    if c.dim() != d.dim() {
        return Err(Error::contract("C and D have different dimensions"));
    }
    let r = d.inv_sqrt()?;
    Ok(r.sandwich(c)?.eigh()?.values)
}

/// `segment_spectrum` for a `D` that has not been certified yet.
pub fn segment_spectrum_checked(c: &SymMatrix, d: &SymMatrix) -> Result<Vec<f64>> {
    let d = SpdMatrix::new(d.clone()).map_err(|_| Error::domain("D is not positive definite"))?;
    segment_spectrum(c, &d)
}

/// Step for a three-point second difference at `theta` inside `domain`: a
/// thousandth of the distance to the boundary, which is the length scale of
/// the curve, or `1e-4·max(1, |θ|)` when both ends are infinite.
pub(crate) fn stencil_step(theta: f64, domain: &ThetaInterval) -> f64 {
    let distance = domain.distance_to_boundary(theta);
    if distance.is_finite() {
        1e-3 * distance
    } else {
        1e-4 * theta.abs().max(1.0)
    }
}

/// One-parameter submodel `{Q(θA + B) : θ ∈ Θ}` of an exponential family on `S_d`.
#[derive(Clone)]
pub struct SegmentModel {
    family: Arc<dyn ExponentialFamily>,
    a: SymMatrix,
    b: SymMatrix,
    theta0: f64,
}

impl fmt::Debug for SegmentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SegmentModel")
            .field("family", &self.family.name())
            .field("a", &self.a)
            .field("b", &self.b)
            .field("theta0", &self.theta0)
            .finish()
    }
}

impl SegmentModel {
    /// `theta0` anchors the segment: `θ₀A + B` must be in the mean domain.
    pub fn new(family: Arc<dyn ExponentialFamily>, a: SymMatrix, b: SymMatrix, theta0: f64) -> Result<Self> {
        let d = family.dim();
        if a.dim() != d || b.dim() != d {
            return Err(Error::contract(format!("segment matrices must be {d}x{d}")));
        }
        if a.is_zero() {
            return Err(Error::contract("segment direction A must be nonzero"));
        }
        let seg = SegmentModel { family, a, b, theta0 };
        if !seg.family.in_mean_domain(&seg.point(theta0)?) {
            return Err(Error::domain(format!(
                "anchor θ₀ = {theta0} is outside the mean domain"
            )));
        }
        Ok(seg)
    }

    pub fn family(&self) -> &Arc<dyn ExponentialFamily> {
        &self.family
    }

    pub fn direction(&self) -> &SymMatrix {
        &self.a
    }

    pub fn offset(&self) -> &SymMatrix {
        &self.b
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Mean `θA + B`.
    pub fn point(&self, theta: f64) -> Result<SymMatrix> {
        self.a.affine(theta, &self.b)
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.point(theta)
            .map(|m| self.family.in_mean_domain(&m))
            .unwrap_or(false)
    }

    /// Eigenvalues of `R^{-1/2} A' R^{-1/2}` with `R` the sign-adjusted anchor point.
    pub fn anchored_spectrum(&self, anchor: f64) -> Result<Vec<f64>> {
        let sign = self.family.mean_cone_sign();
        let r = self.point(anchor)?.scale(sign);
        let r = SpdMatrix::new(r).map_err(|_| Error::domain(format!("θ = {anchor} is outside the segment domain")))?;
        segment_spectrum(&self.a.scale(sign), &r)
    }

    /// Connected component of `Θ = {θ : θA + B ∈ M}` containing the anchor.
    pub fn domain(&self) -> Result<ThetaInterval> {
        self.domain_around(self.theta0)
    }

    fn domain_around(&self, anchor: f64) -> Result<ThetaInterval> {
        let spectrum = self.anchored_spectrum(anchor)?;
        Ok(ThetaInterval::from_anchored_spectrum(anchor, &spectrum))
    }

    fn require_inside(&self, theta: f64) -> Result<SymMatrix> {
        let m = self.point(theta)?;
        if !theta.is_finite() || !self.family.in_mean_domain(&m) {
            return Err(Error::domain(format!("θ = {theta} is outside the segment domain")));
        }
        Ok(m)
    }

    /// `J(θ) = vec(A)ᵀ V(θA + B)⁻¹ vec(A)`.
    pub fn info_quadratic(&self, theta: f64) -> Result<f64> {
        let m = self.require_inside(theta)?;
        let chol = variance_cholesky(self.family.as_ref(), &m)?;
        let va = self.a.vec();
        Ok(dot(&va, &chol.solve(&va)?))
    }

    /// `J(θ) = -d²/dθ² k(ψ(θA + B))` by a central second difference;
    /// requires the family to satisfy `⟨m, ψ(m)⟩ = C`.
    pub fn info_cumulant(&self, theta: f64) -> Result<f64> {
        if self.family.trace_constant().is_none() {
            return Err(Error::Precondition(format!(
                "the {} family has no constant ⟨m, ψ(m)⟩",
                self.family.name()
            )));
        }
        self.require_inside(theta)?;
        let h = stencil_step(theta, &self.domain_around(theta)?);
        let fam = self.family.as_ref();
        let curve = |t: f64| -> Result<f64> {
            let m = self.point(t)?;
            fam.cumulant(&fam.inverse_mean_map(&m)?)
        };
        Ok(-fd::second_derivative(curve, theta, h)?)
    }
}

/// `segment_domain` as a free function.
pub fn segment_domain(seg: &SegmentModel) -> Result<ThetaInterval> {
    seg.domain()
}

pub fn info_theta_quadratic(seg: &SegmentModel, theta: f64) -> Result<f64> {
    seg.info_quadratic(theta)
}

pub fn info_theta_cumulant(seg: &SegmentModel, theta: f64) -> Result<f64> {
    seg.info_cumulant(theta)
}
