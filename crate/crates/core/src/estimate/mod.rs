//! Sampling, estimation of the segment parameter, and Monte Carlo checks.

pub mod estimator;
pub mod experiment;
pub mod moments;
pub mod rng;
pub mod sample;
pub mod score;

pub use estimator::{
    collinear_offset, cramer_rao_bound, sample_mean, sym_inverse, theta_hat, theta_hat_from_samples,
    theta_hat_variance, trace_diagnostic, EstimatorChoice, TraceDiagnostic,
};
pub use experiment::{run_efficiency_experiment, Efficiency, FamilySpec, McConfig, McExperiment, McSummary};
pub use moments::{ScalarMoments, VectorMoments};
pub use rng::RngStream;
pub use sample::{sample_gaussian, sample_nc_wishart, sample_wishart};
pub use score::{mc_score_covariance, mc_score_covariance_matrix};
