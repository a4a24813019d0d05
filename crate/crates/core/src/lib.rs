//! Fisher information for exponential families on symmetric matrices
//! parametrized by their means and by one-dimensional segments of means.
//!
//! Families covered: Gaussian `N(u, Σ)` with known `u`, central Wishart
//! `γ(p; σ)` and noncentral Wishart `γ(p, a; σ)`. Every information formula
//! has at least two independent routes (quadratic form in the variance
//! function, trace formula, eigenvalue sum, log-det curvature), and the
//! [`estimate`] module checks the segment estimators against the
//! Cramér–Rao bound by seeded Monte Carlo.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimate;
pub mod expfam;
pub mod fd;
pub mod gaussian;
pub mod matcalc;
pub mod noncentral;
pub mod segment;
pub mod verify;
pub mod wishart;

pub use error::{Error, Result};
pub use expfam::{check_trace_condition, fisher_canonical, fisher_mean, reparam_info, ExponentialFamily, InfoMatrix};
pub use gaussian::{CovSegment, GaussianFamily};
pub use matcalc::{Matrix, SpdMatrix, SymMatrix};
pub use noncentral::NcWishartFamily;
pub use segment::{SegmentModel, ThetaInterval};
pub use wishart::{ScaleSegment, WishartFamily};
