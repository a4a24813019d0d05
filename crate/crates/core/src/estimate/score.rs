//! Score functions of segment models, written directly from the
//! log-likelihoods, and their Monte Carlo moments.
//!
//! The empirical variance of the score is an oracle for `J(θ)` that never
//! touches the variance function.

use crate::error::{Error, Result};
use crate::estimate::moments::{ScalarMoments, VectorMoments};
use crate::estimate::rng::RngStream;
use crate::estimate::sample::{GaussianSampler, WishartSampler};
use crate::gaussian::CovSegment;
use crate::matcalc::{dot, Matrix, SpdMatrix, SymMatrix};
use crate::segment::SegmentModel;

fn spd_at(seg: &CovSegment, theta: f64) -> Result<SpdMatrix> {
    SpdMatrix::new(seg.at(theta)?).map_err(|_| Error::domain(format!("θ = {theta} is outside the segment domain")))
}

/// `d/dθ log N(x; u, θC + D) = -½tr(Σ⁻¹C) + ½ yᵀΣ⁻¹CΣ⁻¹y`, `y = x - u`.
pub fn gaussian_segment_scores(seg: &CovSegment, theta: f64, u: &[f64], xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let sigma = spd_at(seg, theta)?;
    let inv = sigma.inverse();
    let g = inv.sandwich(seg.c())?;
    let shift = -0.5 * inv.inner(seg.c())?;
    xs.iter()
        .map(|x| {
            if x.len() != u.len() || u.len() != seg.dim() {
                return Err(Error::contract("sample and location dimensions differ"));
            }
            let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - b).collect();
            Ok(shift + 0.5 * g.bilinear(&y, &y)?)
        })
        .collect()
}

/// `d/dθ log γ(x; p, θC + D) = tr(σ⁻¹Cσ⁻¹x) - p·tr(σ⁻¹C)`.
pub fn wishart_segment_scores(p: f64, seg: &CovSegment, theta: f64, xs: &[SymMatrix]) -> Result<Vec<f64>> {
    let sigma = spd_at(seg, theta)?;
    let inv = sigma.inverse();
    let g = inv.sandwich(seg.c())?;
    let shift = -p * inv.inner(seg.c())?;
    xs.iter().map(|x| Ok(shift + g.inner(x)?)).collect()
}

/// `⟨T - m(θ), V(m)⁻¹A⟩`, the score of a general mean segment. Unlike the
/// family-specific scores above, this one goes through the variance function.
pub fn mean_segment_scores(seg: &SegmentModel, theta: f64, stats: &[SymMatrix]) -> Result<Vec<f64>> {
    let m = seg.point(theta)?;
    let fam = seg.family();
    let v = SymMatrix::symmetrize(fam.variance_function(&m)?);
    let direction = v.cholesky()?.solve(&seg.direction().vec())?;
    let mv = m.vec();
    stats
        .iter()
        .map(|t| {
            let centered: Vec<f64> = t.vec().iter().zip(&mv).map(|(a, b)| a - b).collect();
            Ok(dot(&centered, &direction))
        })
        .collect()
}

/// `vec(-½Σ⁻¹ + ½Σ⁻¹yyᵀΣ⁻¹)`, the score of `N(u, Σ)` with respect to `Σ`.
pub fn gaussian_matrix_scores(u: &[f64], sigma: &SpdMatrix, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let inv = sigma.inverse();
    let d = sigma.dim();
    xs.iter()
        .map(|x| {
            if x.len() != d || u.len() != d {
                return Err(Error::contract("sample and location dimensions differ"));
            }
            let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - b).collect();
            let w = inv.mat_vec(&y)?;
            let mut s = inv.scale(-0.5).into_matrix();
            for i in 0..d {
                for j in 0..d {
                    s[(i, j)] += 0.5 * w[i] * w[j];
                }
            }
            Ok(s.vec())
        })
        .collect()
}

/// Empirical mean and variance of a scalar score series.
pub fn mc_score_covariance(scores: &[f64]) -> Result<ScalarMoments> {
    ScalarMoments::from_samples(scores)
}

/// Empirical mean and covariance of vector scores.
pub fn mc_score_covariance_matrix(scores: &[Vec<f64>]) -> Result<VectorMoments> {
    VectorMoments::from_samples(scores)
}

/// Score moments for `{N(u, θC + D)}` from `count` draws on one stream.
pub fn mc_gaussian_segment_info(
    seg: &CovSegment,
    theta: f64,
    u: &[f64],
    count: usize,
    stream: RngStream,
) -> Result<ScalarMoments> {
    let sampler = GaussianSampler::new(u, &spd_at(seg, theta)?)?;
    let mut rng = stream.rng();
    let xs: Vec<Vec<f64>> = (0..count).map(|_| sampler.draw(&mut rng)).collect();
    mc_score_covariance(&gaussian_segment_scores(seg, theta, u, &xs)?)
}

/// Score moments for `{γ(p; θC + D)}` from `count` draws on one stream.
pub fn mc_wishart_segment_info(
    p: f64,
    seg: &CovSegment,
    theta: f64,
    count: usize,
    stream: RngStream,
) -> Result<ScalarMoments> {
    let sampler = WishartSampler::new(p, &spd_at(seg, theta)?)?;
    let mut rng = stream.rng();
    let xs: Vec<SymMatrix> = (0..count).map(|_| sampler.draw(&mut rng)).collect();
    mc_score_covariance(&wishart_segment_scores(p, seg, theta, &xs)?)
}

/// `½Σ⁻¹ ⊗ Σ⁻¹`, the information of `N(u, Σ)` in `Σ`, for comparison with
/// [`gaussian_matrix_scores`].
pub fn gaussian_sigma_information(sigma: &SpdMatrix) -> Matrix {
    let inv = sigma.inverse();
    inv.kron(&inv).scale(0.5)
}
