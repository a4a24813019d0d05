//! Self-check suite: every information formula against an independent
//! route, finite-difference checks of the cumulant derivatives, the `p = ½`
//! equivalence and a small seeded Monte Carlo score check.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::estimate::rng::RngStream;
use crate::estimate::score::{mc_gaussian_segment_info, mc_wishart_segment_info};
use crate::expfam::ExponentialFamily;
use crate::fd;
use crate::gaussian::{
    gaussian_segment_info_eigen, gaussian_segment_info_logdet, gaussian_segment_info_trace, CovSegment, GaussianFamily,
};
use crate::matcalc::{Matrix, SpdMatrix, SymMatrix};
use crate::noncentral::{nc_isotropic_info, nc_segment_info, NcWishartFamily};
use crate::segment::SegmentModel;
use crate::wishart::{wishart_segment_info, wishart_segment_info_eigen, wishart_segment_info_logdet, WishartFamily};

pub const FAMILIES: [&str; 3] = ["gaussian", "wishart", "ncwishart"];

const CLOSED_FORM_TOL: f64 = 1e-10;
const FD_ROUTE_TOL: f64 = 1e-5;
const GRADIENT_TOL: f64 = 1e-5;
const HESSIAN_TOL: f64 = 1e-4;
const ROUND_TRIP_TOL: f64 = 1e-9;
const EQUIVALENCE_TOL: f64 = 1e-12;
const MC_BAND: f64 = 3.0;
const MC_SAMPLES: usize = 20_000;
const MC_SEED: u64 = 20_240_917;

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Families to check; empty means all.
    pub families: Vec<String>,
    /// Scales every variance function by 1.05 so the suite must fail.
    pub inject_fault: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub family: String,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    /// One line per check followed by a summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<10} {:<44} residual={:.3e} tol={:.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.family,
                c.name,
                c.residual,
                c.tolerance
            );
        }
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), self.failures());
        out
    }

    fn push(&mut self, family: &str, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            family: family.to_string(),
            name: name.into(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
        });
    }

    fn push_result(&mut self, family: &str, name: impl Into<String>, residual: Result<f64>, tolerance: f64) {
        self.push(family, name, residual.unwrap_or(f64::INFINITY), tolerance);
    }
}

/// Delegates to a family but inflates its variance function.
struct FaultyVariance(Arc<dyn ExponentialFamily>);

impl ExponentialFamily for FaultyVariance {
    fn name(&self) -> &str {
        self.0.name()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn cumulant(&self, s: &SymMatrix) -> Result<f64> {
        self.0.cumulant(s)
    }
    fn mean_map(&self, s: &SymMatrix) -> Result<SymMatrix> {
        self.0.mean_map(s)
    }
    fn inverse_mean_map(&self, m: &SymMatrix) -> Result<SymMatrix> {
        self.0.inverse_mean_map(m)
    }
    fn variance_function(&self, m: &SymMatrix) -> Result<Matrix> {
        Ok(self.0.variance_function(m)?.scale(1.05))
    }
    fn in_canonical_domain(&self, s: &SymMatrix) -> bool {
        self.0.in_canonical_domain(s)
    }
    fn in_mean_domain(&self, m: &SymMatrix) -> bool {
        self.0.in_mean_domain(m)
    }
    fn trace_constant(&self) -> Option<f64> {
        self.0.trace_constant()
    }
    fn mean_cone_sign(&self) -> f64 {
        self.0.mean_cone_sign()
    }
}

fn wrap(fam: Arc<dyn ExponentialFamily>, fault: bool) -> Arc<dyn ExponentialFamily> {
    if fault {
        Arc::new(FaultyVariance(fam))
    } else {
        fam
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn rel_matrix(a: &Matrix, b: &Matrix) -> Result<f64> {
    Ok(a.max_abs_diff(b)? / b.max_abs().max(1.0))
}

fn sym(rows: &[&[f64]]) -> SymMatrix {
    SymMatrix::new(Matrix::from_rows(rows)).expect("fixture is symmetric")
}

/// Gradient, Hessian and round-trip checks at canonical point `s`.
fn cumulant_checks(report: &mut VerifyReport, fam: &dyn ExponentialFamily, s: &SymMatrix, tag: &str) {
    let name = fam.name().to_string();
    let k = |x: &SymMatrix| fam.cumulant(x);
    let grad = (|| {
        let g = fd::gradient(k, s, fd::first_order_step(s))?;
        rel_matrix(&g, fam.mean_map(s)?.as_matrix())
    })();
    report.push_result(&name, format!("mean map = FD gradient {tag}"), grad, GRADIENT_TOL);
    let hess = (|| {
        let h = fd::hessian_forms(k, s, fd::second_order_step(s))?;
        let v = fam.variance_function(&fam.mean_map(s)?)?;
        rel_matrix(&h, &fd::bilinear_forms(&v, s.dim())?)
    })();
    report.push_result(&name, format!("variance = FD Hessian {tag}"), hess, HESSIAN_TOL);
    let round = (|| {
        let m = fam.mean_map(s)?;
        rel_matrix(fam.mean_map(&fam.inverse_mean_map(&m)?)?.as_matrix(), &m)
    })();
    report.push_result(&name, format!("inverse mean round trip {tag}"), round, ROUND_TRIP_TOL);
}

/// All routes for a covariance/scale segment; `p = None` is the Gaussian family.
fn segment_routes(
    report: &mut VerifyReport,
    fam: Arc<dyn ExponentialFamily>,
    p: Option<f64>,
    seg: &CovSegment,
    theta: f64,
    tag: &str,
) {
    let name = fam.name().to_string();
    let scale = p.unwrap_or(-0.5);
    let model = SegmentModel::new(fam, seg.c().scale(scale), seg.d().scale(scale), seg.theta0());
    let Ok(model) = model else {
        report.push(&name, format!("segment construction {tag}"), f64::INFINITY, 0.0);
        return;
    };
    let trace = match p {
        None => gaussian_segment_info_trace(seg.c(), seg.d(), theta),
        Some(p) => wishart_segment_info(p, seg.c(), seg.d(), theta),
    };
    let Ok(trace) = trace else {
        report.push(&name, format!("trace formula {tag}"), f64::INFINITY, 0.0);
        return;
    };
    let quad = model.info_quadratic(theta).map(|j| rel(j, trace));
    report.push_result(&name, format!("quadratic form = trace {tag}"), quad, CLOSED_FORM_TOL);
    let eigen = SpdMatrix::new(seg.d().clone()).and_then(|dm| match p {
        None => gaussian_segment_info_eigen(seg.c(), &dm, theta),
        Some(p) => wishart_segment_info_eigen(p, seg.c(), &dm, theta),
    });
    report.push_result(
        &name,
        format!("eigenvalue sum = trace {tag}"),
        eigen.map(|j| rel(j, trace)),
        CLOSED_FORM_TOL,
    );
    let logdet = match p {
        None => gaussian_segment_info_logdet(seg.c(), seg.d(), theta),
        Some(p) => wishart_segment_info_logdet(p, seg.c(), seg.d(), theta),
    };
    report.push_result(
        &name,
        format!("log-det curvature = trace {tag}"),
        logdet.map(|j| rel(j, trace)),
        FD_ROUTE_TOL,
    );
    let cumulant = model.info_cumulant(theta).map(|j| rel(j, trace));
    report.push_result(
        &name,
        format!("cumulant curvature = trace {tag}"),
        cumulant,
        FD_ROUTE_TOL,
    );
}

fn gaussian_checks(report: &mut VerifyReport, fault: bool) -> Result<()> {
    let s = sym(&[&[2.0, 0.3, -0.1], &[0.3, 1.5, 0.2], &[-0.1, 0.2, 1.0]]);
    let fam = wrap(Arc::new(GaussianFamily::centered(3)?), fault);
    cumulant_checks(report, fam.as_ref(), &s, "(d=3)");
    let c = sym(&[&[1.0, 0.4, 0.0], &[0.4, -0.5, 0.3], &[0.0, 0.3, 0.8]]);
    let d = sym(&[&[2.0, 0.1, 0.2], &[0.1, 1.5, -0.3], &[0.2, -0.3, 1.2]]);
    let seg = CovSegment::new(c, d, 0.0)?;
    segment_routes(report, fam.clone(), None, &seg, 0.2, "(d=3, θ=0.2)");
    segment_routes(report, fam, None, &seg, -0.3, "(d=3, θ=-0.3)");

    let seg = CovSegment::new(sym(&[&[1.0, 0.5], &[0.5, 2.0]]), sym(&[&[1.0, 0.0], &[0.0, 1.0]]), 1.0)?;
    let analytic = gaussian_segment_info_trace(seg.c(), seg.d(), 1.0)?;
    let mc = mc_gaussian_segment_info(&seg, 1.0, &[0.5, -1.0], MC_SAMPLES, RngStream::new(MC_SEED, 0))?;
    report.push(
        "gaussian",
        "MC score variance = J (z-score)",
        (mc.variance - analytic).abs() / mc.variance_se,
        MC_BAND,
    );
    report.push(
        "gaussian",
        "MC score mean = 0 (z-score)",
        mc.mean.abs() / mc.mean_se,
        MC_BAND,
    );
    Ok(())
}

fn wishart_checks(report: &mut VerifyReport, fault: bool) -> Result<()> {
    let s = sym(&[&[-1.5, 0.2, 0.1], &[0.2, -1.0, -0.3], &[0.1, -0.3, -2.0]]);
    let c = sym(&[&[0.5, 0.2, -0.1], &[0.2, 1.0, 0.0], &[-0.1, 0.0, -0.4]]);
    let d = sym(&[&[1.0, 0.2, 0.0], &[0.2, 2.0, 0.1], &[0.0, 0.1, 1.5]]);
    let seg = CovSegment::new(c, d, 0.0)?;
    for p in [0.5, 1.0, 2.5] {
        let fam = wrap(Arc::new(WishartFamily::new(3, p)?), fault);
        cumulant_checks(report, fam.as_ref(), &s, &format!("(d=3, p={p})"));
        segment_routes(report, fam, Some(p), &seg, 0.3, &format!("(d=3, p={p}, θ=0.3)"));
    }
    // with p = ½ the Wishart and Gaussian segment informations coincide
    let half = Arc::new(WishartFamily::new(3, 0.5)?);
    let gauss = Arc::new(GaussianFamily::centered(3)?);
    for theta in [-0.4, 0.0, 0.6] {
        let residual = (|| {
            let w = half.mean_segment(&seg)?.info_quadratic(theta)?;
            let g = seg.gaussian_mean_segment(gauss.clone())?.info_quadratic(theta)?;
            Ok(rel(w, g))
        })();
        report.push_result(
            "wishart",
            format!("p=½ equals Gaussian (θ={theta})"),
            residual,
            EQUIVALENCE_TOL,
        );
    }

    let seg = CovSegment::new(sym(&[&[1.0, 0.3], &[0.3, 0.5]]), SymMatrix::identity(2), 1.0)?;
    let p = 1.5;
    let analytic = wishart_segment_info(p, seg.c(), seg.d(), 1.0)?;
    let mc = mc_wishart_segment_info(p, &seg, 1.0, MC_SAMPLES, RngStream::new(MC_SEED, 1))?;
    report.push(
        "wishart",
        "MC score variance = J (z-score)",
        (mc.variance - analytic).abs() / mc.variance_se,
        MC_BAND,
    );
    report.push(
        "wishart",
        "MC score mean = 0 (z-score)",
        mc.mean.abs() / mc.mean_se,
        MC_BAND,
    );
    Ok(())
}

fn noncentral_checks(report: &mut VerifyReport, fault: bool) -> Result<()> {
    let a = sym(&[&[1.0, 0.2], &[0.2, 0.5]]);
    let s = sym(&[&[-1.2, 0.3], &[0.3, -0.9]]);
    let fam = wrap(Arc::new(NcWishartFamily::new(1.5, a)?), fault);
    cumulant_checks(report, fam.as_ref(), &s, "(d=2, p=1.5)");
    for (p, d) in [(1.0, 2usize), (2.0, 3)] {
        let iso = wrap(Arc::new(NcWishartFamily::new(p, SymMatrix::identity(d))?), fault);
        for theta in [0.0, 0.7] {
            let residual = (|| {
                let seg = SegmentModel::new(iso.clone(), SymMatrix::identity(d), SymMatrix::identity(d), theta)?;
                Ok(rel(
                    seg.info_quadratic(theta)?,
                    nc_isotropic_info(p, d, 1.0, 1.0, theta)?,
                ))
            })();
            report.push_result(
                "ncwishart",
                format!("quadratic form = isotropic closed form (d={d}, p={p}, θ={theta})"),
                residual,
                1e-8,
            );
        }
    }
    if !fault {
        let j = nc_segment_info(
            1.0,
            &SymMatrix::identity(2),
            &SymMatrix::identity(2),
            &SymMatrix::identity(2),
            0.0,
        )?;
        report.push(
            "ncwishart",
            "isotropic example J(0) = 2/(3√1.25 - 2.5)",
            rel(j, 2.0 / (3.0 * 1.25f64.sqrt() - 2.5)),
            1e-10,
        );
    }
    Ok(())
}

/// Runs the checks for the selected families.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let selected = |f: &str| opts.families.is_empty() || opts.families.iter().any(|x| x == f);
    if selected("gaussian") {
        gaussian_checks(&mut report, opts.inject_fault)?;
    }
    if selected("wishart") {
        wishart_checks(&mut report, opts.inject_fault)?;
    }
    if selected("ncwishart") {
        noncentral_checks(&mut report, opts.inject_fault)?;
    }
    Ok(report)
}
