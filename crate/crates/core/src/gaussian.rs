//! Gaussian family `N(u, Σ)` with known location `u`, seen as a general
//! exponential family with sufficient statistic `T(x) = -½(x - u)(x - u)ᵀ`.
//!
//! Canonical parameter `s = Σ⁻¹ ∈ S_d⁺`, mean `m = -½Σ ∈ -S_d⁺`, so the
//! covariance segment `Σ = θC + D` is the mean segment `A = -C/2, B = -D/2`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expfam::ExponentialFamily;
use crate::fd;
use crate::matcalc::{Matrix, SpdMatrix, SymMatrix};
use crate::segment::{segment_spectrum, stencil_step, SegmentModel, ThetaInterval};

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianFamily {
    d: usize,
    u: Vec<f64>,
}

impl GaussianFamily {
    pub fn new(d: usize, u: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::contract("Gaussian family needs d >= 1"));
        }
        if u.len() != d {
            return Err(Error::contract(format!(
                "location has length {}, expected {d}",
                u.len()
            )));
        }
        Ok(GaussianFamily { d, u })
    }

    /// Centered family, `u = 0`.
    pub fn centered(d: usize) -> Result<Self> {
        GaussianFamily::new(d, vec![0.0; d])
    }

    pub fn location(&self) -> &[f64] {
        &self.u
    }

    /// `T(x) = -½(x - u)(x - u)ᵀ`.
    pub fn sufficient_statistic(&self, x: &[f64]) -> SymMatrix {
        let centered: Vec<f64> = x.iter().zip(&self.u).map(|(a, b)| a - b).collect();
        let mut m = Matrix::zeros(self.d, self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                m[(i, j)] = -0.5 * centered[i] * centered[j];
            }
        }
        SymMatrix::symmetrize(m)
    }
}

/// `gaussian_family(d, u)` constructor.
pub fn gaussian_family(d: usize, u: Vec<f64>) -> Result<GaussianFamily> {
    GaussianFamily::new(d, u)
}

fn spd(x: &SymMatrix, what: &str) -> Result<SpdMatrix> {
    SpdMatrix::new(x.clone()).map_err(|_| Error::domain(format!("{what} is not positive definite")))
}

impl ExponentialFamily for GaussianFamily {
    fn name(&self) -> &str {
        "gaussian"
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn cumulant(&self, s: &SymMatrix) -> Result<f64> {
        Ok(-0.5 * spd(s, "s")?.logdet())
    }

    fn mean_map(&self, s: &SymMatrix) -> Result<SymMatrix> {
        Ok(spd(s, "s")?.inverse().scale(-0.5))
    }

    fn inverse_mean_map(&self, m: &SymMatrix) -> Result<SymMatrix> {
        // ψ(m) = -½ m⁻¹ = ½ (-m)⁻¹
        Ok(spd(&m.scale(-1.0), "-m")?.inverse().scale(0.5))
    }

    fn variance_function(&self, m: &SymMatrix) -> Result<Matrix> {
        Ok(m.kron(m).scale(2.0))
    }

    fn in_canonical_domain(&self, s: &SymMatrix) -> bool {
        s.is_pd()
    }

    fn in_mean_domain(&self, m: &SymMatrix) -> bool {
        m.scale(-1.0).is_pd()
    }

    fn trace_constant(&self) -> Option<f64> {
        Some(-0.5 * self.d as f64)
    }

    fn mean_cone_sign(&self) -> f64 {
        -1.0
    }
}

/// Segment `θ ↦ θC + D` of covariance (Gaussian) or scale (Wishart) matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct CovSegment {
    c: SymMatrix,
    d: SymMatrix,
    theta0: f64,
}

impl CovSegment {
    /// `θ₀C + D` must be positive definite.
    pub fn new(c: SymMatrix, d: SymMatrix, theta0: f64) -> Result<Self> {
        if c.dim() != d.dim() {
            return Err(Error::contract("C and D have different dimensions"));
        }
        if c.is_zero() {
            return Err(Error::contract("segment direction C must be nonzero"));
        }
        let seg = CovSegment { c, d, theta0 };
        spd(&seg.at(theta0)?, "θ₀C + D")?;
        Ok(seg)
    }

    pub fn c(&self) -> &SymMatrix {
        &self.c
    }

    pub fn d(&self) -> &SymMatrix {
        &self.d
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn at(&self, theta: f64) -> Result<SymMatrix> {
        self.c.affine(theta, &self.d)
    }

    /// Eigenvalues of `R^{-1/2} C R^{-1/2}`, `R = θ₀C + D`.
    pub fn anchored_spectrum(&self) -> Result<Vec<f64>> {
        segment_spectrum(&self.c, &spd(&self.at(self.theta0)?, "θ₀C + D")?)
    }

    /// Interval of θ with `θC + D` positive definite, around the anchor.
    pub fn domain(&self) -> Result<ThetaInterval> {
        Ok(ThetaInterval::from_anchored_spectrum(
            self.theta0,
            &self.anchored_spectrum()?,
        ))
    }

    /// The same model as a mean segment of the Gaussian family: `A = -C/2`, `B = -D/2`.
    pub fn gaussian_mean_segment(&self, family: Arc<GaussianFamily>) -> Result<SegmentModel> {
        SegmentModel::new(family, self.c.scale(-0.5), self.d.scale(-0.5), self.theta0)
    }
}

/// `tr((C Σ⁻¹)²)` with `Σ = θC + D`.
pub(crate) fn trace_quadratic(c: &SymMatrix, d: &SymMatrix, theta: f64) -> Result<f64> {
    if c.dim() != d.dim() {
        return Err(Error::contract("C and D have different dimensions"));
    }
    let sigma = spd(&c.affine(theta, d)?, "θC + D")?;
    let x = sigma.inverse().matmul(c)?;
    Ok(x.matmul(&x)?.trace())
}

/// `d²/dθ² log det(θC + D)` by a central second difference whose step stays
/// well inside the positive definite range.
pub(crate) fn logdet_curvature(c: &SymMatrix, d: &SymMatrix, theta: f64) -> Result<f64> {
    if c.dim() != d.dim() {
        return Err(Error::contract("C and D have different dimensions"));
    }
    let r = spd(&c.affine(theta, d)?, "θC + D")?;
    let domain = ThetaInterval::from_anchored_spectrum(theta, &segment_spectrum(c, &r)?);
    let h = stencil_step(theta, &domain);
    if !(h > 0.0) {
        return Err(Error::domain(
            "finite-difference stencil leaves the positive definite cone",
        ));
    }
    let logdet = |t: f64| -> Result<f64> { Ok(spd(&c.affine(t, d)?, "θC + D")?.logdet()) };
    fd::second_derivative(logdet, theta, h)
}

/// `Σ_j (a_j / (1 + a_j θ))²`.
pub(crate) fn eigen_sum(spectrum: &[f64], theta: f64) -> Result<f64> {
    let mut total = 0.0;
    for &a in spectrum {
        let denom = 1.0 + a * theta;
        if denom.abs() <= 1e-12 * (a * theta).abs().max(1.0) {
            return Err(Error::Pole { eigenvalue: a });
        }
        if denom < 0.0 {
            return Err(Error::domain(format!("1 + a θ < 0 for a = {a}, θ = {theta}")));
        }
        total += (a / denom).powi(2);
    }
    Ok(total)
}

/// `J(θ) = ½ tr(C(θC + D)⁻¹ C(θC + D)⁻¹)`.
pub fn gaussian_segment_info_trace(c: &SymMatrix, d: &SymMatrix, theta: f64) -> Result<f64> {
    Ok(0.5 * trace_quadratic(c, d, theta)?)
}

/// `J(θ) = -½ d²/dθ² log det(θC + D)`.
pub fn gaussian_segment_info_logdet(c: &SymMatrix, d: &SymMatrix, theta: f64) -> Result<f64> {
    Ok(-0.5 * logdet_curvature(c, d, theta)?)
}

/// `J(θ) = ½ Σ (a_j / (1 + a_j θ))²` with `a_j` the eigenvalues of `D^{-1/2} C D^{-1/2}`.
pub fn gaussian_segment_info_eigen(c: &SymMatrix, d: &SpdMatrix, theta: f64) -> Result<f64> {
    Ok(0.5 * eigen_sum(&segment_spectrum(c, d)?, theta)?)
}

/// Circulant matrix with first row `e_2 + e_d`, `d >= 3`.
pub fn circulant_matrix(d: usize) -> Result<SymMatrix> {
    if d < 3 {
        return Err(Error::contract(format!("circulant direction needs d >= 3, got {d}")));
    }
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        m[(i, (i + 1) % d)] = 1.0;
        m[(i, (i + d - 1) % d)] = 1.0;
    }
    SymMatrix::new(m)
}

/// Tridiagonal matrix with unit off-diagonals and zero diagonal, `d >= 2`.
pub fn tridiagonal_matrix(d: usize) -> Result<SymMatrix> {
    if d < 2 {
        return Err(Error::contract(format!("tridiagonal direction needs d >= 2, got {d}")));
    }
    let mut m = Matrix::zeros(d, d);
    for i in 0..d - 1 {
        m[(i, i + 1)] = 1.0;
        m[(i + 1, i)] = 1.0;
    }
    SymMatrix::new(m)
}

/// `2cos(2πj/d)`, `j = 0..d-1`.
pub fn circulant_spectrum(d: usize) -> Vec<f64> {
    (0..d).map(|j| 2.0 * (2.0 * PI * j as f64 / d as f64).cos()).collect()
}

/// `2cos(jπ/(d+1))`, `j = 1..=d`.
pub fn tridiagonal_spectrum(d: usize) -> Vec<f64> {
    (1..=d)
        .map(|j| 2.0 * (j as f64 * PI / (d as f64 + 1.0)).cos())
        .collect()
}

/// Closed form for `N(0, θA + I)` with `A` the circulant matrix.
pub fn circulant_info(d: usize, theta: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::contract(format!("circulant direction needs d >= 3, got {d}")));
    }
    Ok(0.5 * eigen_sum(&circulant_spectrum(d), theta)?)
}

/// Closed form for `N(0, θC + I)` with `C` the tridiagonal matrix.
pub fn tridiag_info(d: usize, theta: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::contract(format!("tridiagonal direction needs d >= 2, got {d}")));
    }
    Ok(0.5 * eigen_sum(&tridiagonal_spectrum(d), theta)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_and_variance_at_identity() {
        let g = GaussianFamily::centered(2).unwrap();
        let m = SymMatrix::scalar(2, -0.5);
        let s = g.inverse_mean_map(&m).unwrap();
        assert!(s.max_abs_diff(&SymMatrix::identity(2)).unwrap() < 1e-15);
        let v = g.variance_function(&m).unwrap();
        assert_eq!(v, Matrix::identity(4).scale(0.5));
        assert!(!g.in_mean_domain(&SymMatrix::identity(2)));
        assert_eq!(g.trace_constant(), Some(-1.0));
    }

    #[test]
    fn scalar_covariance_segment() {
        let one = SymMatrix::identity(1);
        let zero = SymMatrix::zeros(1);
        let j = gaussian_segment_info_trace(&one, &zero, 2.0).unwrap();
        assert!((j - 0.125).abs() < 1e-15);
        let j = gaussian_segment_info_logdet(&one, &zero, 2.0).unwrap();
        assert!((j - 0.125).abs() < 1e-6);
    }

    #[test]
    fn identity_pair() {
        let i2 = SymMatrix::identity(2);
        let j = gaussian_segment_info_logdet(&i2, &i2, 0.0).unwrap();
        assert!((j - 1.0).abs() < 1e-6);
        let i3 = SymMatrix::identity(3);
        assert!((gaussian_segment_info_trace(&i3, &i3, 1.0).unwrap() - 0.375).abs() < 1e-15);
        let j = gaussian_segment_info_eigen(&i3, &SpdMatrix::identity(3), 1.0).unwrap();
        assert!((j - 0.375).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_eigen() {
        let c = SymMatrix::scalar(1, 2.0);
        let j = gaussian_segment_info_eigen(&c, &SpdMatrix::identity(1), 0.0).unwrap();
        assert_eq!(j, 2.0);
    }

    #[test]
    fn pole_and_domain_errors() {
        assert!(matches!(circulant_info(4, 0.5), Err(Error::Pole { .. })));
        assert!(matches!(circulant_info(4, 0.7), Err(Error::Domain(_))));
        let c = circulant_matrix(4).unwrap();
        assert!(matches!(
            gaussian_segment_info_trace(&c, &SymMatrix::identity(4), 0.7),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn small_dimension_constructors() {
        assert!(matches!(circulant_matrix(2), Err(Error::Contract(_))));
        assert!(matches!(circulant_info(2, 0.0), Err(Error::Contract(_))));
        assert!(matches!(tridiagonal_matrix(1), Err(Error::Contract(_))));
        assert!(matches!(tridiag_info(1, 0.0), Err(Error::Contract(_))));
    }

    #[test]
    fn closed_form_values() {
        assert!((circulant_info(4, 0.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((circulant_info(3, 0.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((tridiag_info(3, 0.0).unwrap() - 2.0).abs() < 1e-12);
        let expected = 0.5 * ((1.0f64 / 1.1).powi(2) + (1.0f64 / 0.9).powi(2));
        assert!((tridiag_info(2, 0.1).unwrap() - expected).abs() < 1e-12);
        assert!((tridiag_info(2, 0.1).unwrap() - 1.030_507).abs() < 1e-6);
    }

    #[test]
    fn sufficient_statistic_is_negative_half_outer() {
        let g = GaussianFamily::new(2, vec![1.0, -1.0]).unwrap();
        let t = g.sufficient_statistic(&[2.0, 1.0]);
        let expected = SymMatrix::new(Matrix::from_rows(&[[-0.5, -1.0], [-1.0, -2.0]])).unwrap();
        assert_eq!(t, expected);
    }

    #[test]
    fn cov_segment_requires_pd_anchor() {
        let c = circulant_matrix(4).unwrap();
        assert!(CovSegment::new(c.clone(), SymMatrix::identity(4), 0.6).is_err());
        let seg = CovSegment::new(c, SymMatrix::identity(4), 0.0).unwrap();
        let iv = seg.domain().unwrap();
        assert!((iv.lower + 0.5).abs() < 1e-12 && (iv.upper - 0.5).abs() < 1e-12);
    }
}
