//! Seeded Monte Carlo experiments for the segment estimators.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::estimator::{
    collinear_offset, cramer_rao_bound, theta_hat, theta_hat_variance, trace_diagnostic, EstimatorChoice,
    TraceDiagnostic,
};
use crate::estimate::moments::ScalarMoments;
use crate::estimate::rng::RngStream;
use crate::estimate::sample::{GaussianSampler, NcWishartSampler, WishartSampler};
use crate::expfam::ExponentialFamily;
use crate::gaussian::GaussianFamily;
use crate::matcalc::{Matrix, SpdMatrix, SymMatrix};
use crate::noncentral::NcWishartFamily;
use crate::segment::SegmentModel;
use crate::wishart::WishartFamily;

/// Width of the agreement band, in standard errors.
pub const SE_BAND: f64 = 3.0;

/// Experiment description as read from JSON.
///
/// Give either the mean segment `A`, `B` or the covariance/scale segment
/// `C`, `D`. The noncentral family accepts only `A`, `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<SymMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub seg_a: Option<SymMatrix>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub seg_b: Option<SymMatrix>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub seg_c: Option<SymMatrix>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub seg_d: Option<SymMatrix>,
    pub theta: f64,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub estimator: EstimatorChoice,
}

#[derive(Clone, Debug)]
pub enum FamilySpec {
    Gaussian { u: Vec<f64> },
    Wishart { p: f64 },
    NcWishart { p: f64, a: SymMatrix },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Gaussian { .. } => "gaussian",
            FamilySpec::Wishart { .. } => "wishart",
            FamilySpec::NcWishart { .. } => "ncwishart",
        }
    }

    /// Shape `p`; the Gaussian family behaves as `p = ½`.
    pub fn shape(&self) -> f64 {
        match self {
            FamilySpec::Gaussian { .. } => 0.5,
            FamilySpec::Wishart { p } | FamilySpec::NcWishart { p, .. } => *p,
        }
    }

    fn build(&self, d: usize) -> Result<Arc<dyn ExponentialFamily>> {
        Ok(match self {
            FamilySpec::Gaussian { u } => Arc::new(GaussianFamily::new(d, u.clone())?),
            FamilySpec::Wishart { p } => Arc::new(WishartFamily::new(d, *p)?),
            FamilySpec::NcWishart { p, a } => Arc::new(NcWishartFamily::new(*p, a.clone())?),
        })
    }
}

/// Draws the sufficient statistic of one family at a fixed mean.
enum StatSampler {
    Gaussian(GaussianSampler, Vec<f64>),
    Wishart(WishartSampler),
    NcWishart(NcWishartSampler),
}

impl StatSampler {
    fn new(spec: &FamilySpec, family: &dyn ExponentialFamily, m: &SymMatrix) -> Result<Self> {
        let not_pd = |_| Error::domain("segment point is outside the mean domain");
        Ok(match spec {
            FamilySpec::Gaussian { u } => {
                let sigma = SpdMatrix::new(m.scale(-2.0)).map_err(not_pd)?;
                StatSampler::Gaussian(GaussianSampler::new(u, &sigma)?, u.clone())
            }
            FamilySpec::Wishart { p } => {
                let sigma = SpdMatrix::new(m.scale(1.0 / p)).map_err(not_pd)?;
                StatSampler::Wishart(WishartSampler::new(*p, &sigma)?)
            }
            FamilySpec::NcWishart { p, a } => {
                let s = family.inverse_mean_map(m)?;
                let sigma = SpdMatrix::new(SpdMatrix::new(s.scale(-1.0)).map_err(not_pd)?.inverse())?;
                StatSampler::NcWishart(NcWishartSampler::new(*p, a, &sigma)?)
            }
        })
    }

    /// Running sum of `count` sufficient statistics.
    fn sum<R: rand::Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Matrix {
        let mut acc: Option<Matrix> = None;
        for _ in 0..count {
            let t = match self {
                StatSampler::Gaussian(s, u) => {
                    let x = s.draw(rng);
                    let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - b).collect();
                    let d = y.len();
                    let mut t = Matrix::zeros(d, d);
                    for i in 0..d {
                        for j in 0..d {
                            t[(i, j)] = -0.5 * y[i] * y[j];
                        }
                    }
                    t
                }
                StatSampler::Wishart(s) => s.draw(rng).into_matrix(),
                StatSampler::NcWishart(s) => s.draw(rng).into_matrix(),
            };
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t).expect("equal shapes"),
            });
        }
        acc.expect("count is positive")
    }
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct McExperiment {
    pub family: FamilySpec,
    pub segment: SegmentModel,
    pub theta: f64,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub estimator: EstimatorChoice,
    estimator_matrix: SymMatrix,
}

fn require<T>(x: Option<T>, what: &str) -> Result<T> {
    x.ok_or_else(|| Error::Input(format!("missing field \"{what}\"")))
}

impl McExperiment {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: McConfig = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
        McExperiment::from_config(&cfg)
    }

    pub fn from_config(cfg: &McConfig) -> Result<Self> {
        let (a, b, cov_pair) = match (&cfg.seg_a, &cfg.seg_b, &cfg.seg_c, &cfg.seg_d) {
            (Some(a), Some(b), None, None) => (a.clone(), b.clone(), false),
            (None, None, Some(c), Some(d)) => (c.clone(), d.clone(), true),
            _ => return Err(Error::Input("give exactly one of the pairs (A, B) or (C, D)".into())),
        };
        let d = a.dim();
        if b.dim() != d {
            return Err(Error::Input("segment matrices have different dimensions".into()));
        }
        let family = match cfg.family.as_str() {
            "gaussian" => FamilySpec::Gaussian {
                u: cfg.u.clone().unwrap_or_else(|| vec![0.0; d]),
            },
            "wishart" => FamilySpec::Wishart {
                p: require(cfg.p, "p")?,
            },
            "ncwishart" => FamilySpec::NcWishart {
                p: require(cfg.p, "p")?,
                a: require(cfg.a.clone(), "a")?,
            },
            other => return Err(Error::Input(format!("unknown family \"{other}\""))),
        };
        let (a, b) = match (&family, cov_pair) {
            (_, false) => (a, b),
            (FamilySpec::Gaussian { .. }, true) => (a.scale(-0.5), b.scale(-0.5)),
            (FamilySpec::Wishart { p }, true) => (a.scale(*p), b.scale(*p)),
            (FamilySpec::NcWishart { .. }, true) => {
                return Err(Error::Input("the noncentral family takes a mean segment (A, B)".into()))
            }
        };
        McExperiment::new(
            family,
            a,
            b,
            cfg.theta,
            cfg.n,
            cfg.replicates,
            cfg.seed,
            cfg.estimator.clone(),
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        family: FamilySpec,
        a: SymMatrix,
        b: SymMatrix,
        theta: f64,
        n: usize,
        replicates: usize,
        seed: u64,
        estimator: EstimatorChoice,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("n must be at least 1".into()));
        }
        if replicates < 2 {
            return Err(Error::Input("replicates must be at least 2".into()));
        }
        if !theta.is_finite() {
            return Err(Error::Input("θ must be finite".into()));
        }
        let segment = SegmentModel::new(family.build(a.dim())?, a, b, theta)?;
        let estimator_matrix = estimator.resolve(segment.direction())?;
        Ok(McExperiment {
            family,
            segment,
            theta,
            n,
            replicates,
            seed,
            estimator,
            estimator_matrix,
        })
    }

    pub fn estimator_matrix(&self) -> &SymMatrix {
        &self.estimator_matrix
    }

    /// `c` with `B = cA`, when the segment passes through the origin's ray.
    pub fn collinear_offset(&self) -> Option<f64> {
        collinear_offset(self.segment.direction(), self.segment.offset())
    }
}

/// Whether the efficiency theorem applies, and if so its empirical verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Efficiency {
    Verdict(bool),
    NotApplicable(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McSummary {
    pub family: String,
    pub d: usize,
    pub p: f64,
    pub theta: f64,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub estimator: String,
    pub estimator_mean: f64,
    pub estimator_mean_se: f64,
    pub bias: f64,
    pub empirical_variance: f64,
    pub empirical_variance_se: f64,
    pub theoretical_variance: f64,
    pub cramer_rao_bound: f64,
    pub efficiency_ratio: f64,
    pub efficiency_ratio_se: f64,
    pub theoretical_efficiency: f64,
    pub unbiased_within_band: bool,
    pub variance_within_band: bool,
    pub collinear_offset: Option<f64>,
    pub efficient: Efficiency,
    pub trace_diagnostic: Option<TraceDiagnostic>,
}

/// Runs every replicate, each on its own stream, and summarizes the estimates.
pub fn run_efficiency_experiment(exp: &McExperiment) -> Result<McSummary> {
    let estimates = replicate_estimates(exp)?;
    summarize(exp, &estimates)
}

/// `θ̂_C` for each replicate, in replicate order.
pub fn replicate_estimates(exp: &McExperiment) -> Result<Vec<f64>> {
    let seg = &exp.segment;
    let m = seg.point(exp.theta)?;
    let sampler = StatSampler::new(&exp.family, seg.family().as_ref(), &m)?;
    let scale = 1.0 / exp.n as f64;
    (0..exp.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(exp.seed, r as u64).rng();
            let mean = SymMatrix::symmetrize(sampler.sum(exp.n, &mut rng).scale(scale));
            theta_hat(&exp.estimator_matrix, seg.direction(), seg.offset(), &mean)
        })
        .collect()
}

fn summarize(exp: &McExperiment, estimates: &[f64]) -> Result<McSummary> {
    let seg = &exp.segment;
    let moments = ScalarMoments::from_samples(estimates)?;
    let theoretical = theta_hat_variance(seg, &exp.estimator_matrix, exp.theta, exp.n)?;
    let bound = cramer_rao_bound(seg, exp.theta, exp.n)?;
    let ratio = bound / moments.variance;
    let ratio_se = ratio * moments.variance_se / moments.variance;
    let collinear = exp.collinear_offset();
    let inverse_a = exp.estimator == EstimatorChoice::InverseA;
    let efficient = match (&exp.family, collinear, inverse_a) {
        (FamilySpec::NcWishart { .. }, _, _) => {
            Efficiency::NotApplicable("n/a (no efficiency theory for this family)".into())
        }
        (_, Some(_), true) => Efficiency::Verdict((ratio - 1.0).abs() <= SE_BAND * ratio_se),
        (_, None, true) => Efficiency::NotApplicable("n/a (open question)".into()),
        (_, _, false) => Efficiency::NotApplicable("n/a (estimator is not A⁻¹)".into()),
    };
    let diagnostic = if inverse_a {
        Some(trace_diagnostic(seg.direction(), seg.offset(), exp.theta)?)
    } else {
        None
    };
    let estimator = match &exp.estimator {
        EstimatorChoice::InverseA => "inverseA".to_string(),
        EstimatorChoice::Matrix(_) => "matrix".to_string(),
    };
    Ok(McSummary {
        family: exp.family.name().to_string(),
        d: seg.direction().dim(),
        p: exp.family.shape(),
        theta: exp.theta,
        n: exp.n,
        replicates: exp.replicates,
        seed: exp.seed,
        estimator,
        estimator_mean: moments.mean,
        estimator_mean_se: moments.mean_se,
        bias: moments.mean - exp.theta,
        empirical_variance: moments.variance,
        empirical_variance_se: moments.variance_se,
        theoretical_variance: theoretical,
        cramer_rao_bound: bound,
        efficiency_ratio: ratio,
        efficiency_ratio_se: ratio_se,
        theoretical_efficiency: bound / theoretical,
        unbiased_within_band: moments.mean_within(exp.theta, SE_BAND),
        variance_within_band: moments.variance_within(theoretical, SE_BAND),
        collinear_offset: collinear,
        efficient,
        trace_diagnostic: diagnostic,
    })
}
