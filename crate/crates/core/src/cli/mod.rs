//! Command-line front end. Each `cmd_*` function returns the bytes the
//! binary would print, so the commands can be exercised without a process.

pub mod args;
pub mod format;

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use args::{
    Cli, Command, DomainArgs, EfficiencyArgs, FamilyArg, Format, InfoGridArgs, Preset, SegmentArgs, VerifyArgs,
};
use format::{fmt_g, to_json_bytes, CSV_DIGITS};

use crate::error::Error;
use crate::estimate::{run_efficiency_experiment, Efficiency, EstimatorChoice, McConfig, McExperiment, McSummary};
use crate::gaussian::{
    circulant_matrix, gaussian_segment_info_eigen, gaussian_segment_info_logdet, gaussian_segment_info_trace,
    tridiagonal_matrix, CovSegment, GaussianFamily,
};
use crate::matcalc::{SpdMatrix, SymMatrix};
use crate::noncentral::NcWishartFamily;
use crate::segment::{SegmentModel, ThetaInterval};
use crate::verify::{run_verification, VerifyOptions, FAMILIES};
use crate::wishart::{wishart_segment_info, wishart_segment_info_eigen, wishart_segment_info_logdet, WishartFamily};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EMPTY_DOMAIN: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Routes agreeing to this relative tolerance mark a grid row "ok".
pub const AGREEMENT_TOL: f64 = 1e-5;
/// Relative margin keeping grid points strictly inside the domain.
pub const ENDPOINT_MARGIN: f64 = 1e-9;
/// Significant digits of the interval endpoints in the plain-text domain report.
const DOMAIN_DIGITS: usize = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("empty domain: {0}")]
    EmptyDomain(String),
    #[error("verification failed: {0} check(s) out of tolerance")]
    Verification(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::EmptyDomain(_) => EXIT_EMPTY_DOMAIN,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

/// Reads a symmetric matrix in the `{"rows", "cols", "data"}` JSON layout.
pub fn load_matrix(path: &Path) -> CliResult<SymMatrix> {
    serde_json::from_str(&read_text(path)?).map_err(|e| input(format!("malformed matrix file {}: {e}", path.display())))
}

fn load_vector(path: &Path) -> CliResult<Vec<f64>> {
    serde_json::from_str(&read_text(path)?).map_err(|e| input(format!("malformed vector file {}: {e}", path.display())))
}

/// A segment resolved from the command line.
enum ResolvedSegment {
    /// Gaussian (`p = None`) or Wishart covariance/scale segment.
    Cov {
        p: Option<f64>,
        seg: CovSegment,
        model: SegmentModel,
    },
    /// Noncentral Wishart mean segment.
    Mean { model: SegmentModel },
}

impl ResolvedSegment {
    fn model(&self) -> &SegmentModel {
        match self {
            ResolvedSegment::Cov { model, .. } | ResolvedSegment::Mean { model } => model,
        }
    }
}

enum Pair {
    Cov(SymMatrix, SymMatrix),
    Mean(SymMatrix, SymMatrix),
}

fn load_pair(args: &SegmentArgs, family: FamilyArg) -> CliResult<Pair> {
    let files = [&args.c_file, &args.d_file, &args.a_file, &args.b_file];
    if let Some(preset) = args.preset {
        if files.iter().any(|f| f.is_some()) {
            return Err(input("--preset cannot be combined with matrix files"));
        }
        let d = args.dim.ok_or_else(|| input("--preset needs --d"))?;
        let dir = match preset {
            Preset::Circulant => circulant_matrix(d)?,
            Preset::Tridiagonal => tridiagonal_matrix(d)?,
        };
        let id = SymMatrix::identity(d);
        return Ok(match family {
            FamilyArg::Ncwishart => Pair::Mean(dir, id),
            _ => Pair::Cov(dir, id),
        });
    }
    match (&args.c_file, &args.d_file, &args.a_file, &args.b_file) {
        (Some(c), Some(d), None, None) => Ok(Pair::Cov(load_matrix(c)?, load_matrix(d)?)),
        (None, None, Some(a), Some(b)) => Ok(Pair::Mean(load_matrix(a)?, load_matrix(b)?)),
        _ => Err(input("give exactly one of --C/--D, --A/--B or --preset")),
    }
}

fn anchor_error(e: Error) -> CliError {
    match e {
        Error::Domain(msg) => CliError::EmptyDomain(msg),
        Error::NotPositiveDefinite => CliError::EmptyDomain("anchor is not positive definite".into()),
        other => other.into(),
    }
}

fn resolve_segment(args: &SegmentArgs, theta0: f64) -> CliResult<ResolvedSegment> {
    let family = args.family.ok_or_else(|| input("--family is required"))?;
    if !theta0.is_finite() {
        return Err(input("--theta0 must be finite"));
    }
    let pair = load_pair(args, family)?;
    let (c, d) = match &pair {
        Pair::Cov(c, d) | Pair::Mean(c, d) => (c, d),
    };
    if c.dim() != d.dim() {
        return Err(input("segment matrices have different dimensions"));
    }
    let dim = c.dim();
    if let Some(u) = &args.u_file {
        if load_vector(u)?.len() != dim {
            return Err(input("location vector has the wrong length"));
        }
    }
    match family {
        FamilyArg::Gaussian | FamilyArg::Wishart => {
            let p = match family {
                FamilyArg::Wishart => Some(args.p.ok_or_else(|| input("--p is required for wishart"))?),
                _ => None,
            };
            let (c, d) = match (pair, p) {
                (Pair::Cov(c, d), _) => (c, d),
                (Pair::Mean(a, b), None) => (a.scale(-2.0), b.scale(-2.0)),
                (Pair::Mean(a, b), Some(p)) => (a.scale(1.0 / p), b.scale(1.0 / p)),
            };
            let seg = CovSegment::new(c, d, theta0).map_err(anchor_error)?;
            let model = match p {
                None => seg.gaussian_mean_segment(Arc::new(GaussianFamily::centered(dim)?)),
                Some(p) => Arc::new(WishartFamily::new(dim, p)?).mean_segment(&seg),
            }
            .map_err(anchor_error)?;
            Ok(ResolvedSegment::Cov { p, seg, model })
        }
        FamilyArg::Ncwishart => {
            let Pair::Mean(a, b) = pair else {
                return Err(input("the noncentral family takes a mean segment (--A/--B)"));
            };
            let p = args.p.ok_or_else(|| input("--p is required for ncwishart"))?;
            let nc = args
                .noncentrality
                .as_ref()
                .ok_or_else(|| input("--a is required for ncwishart"))?;
            let fam = NcWishartFamily::new(p, load_matrix(nc)?)?;
            let model = SegmentModel::new(Arc::new(fam), a, b, theta0).map_err(anchor_error)?;
            Ok(ResolvedSegment::Mean { model })
        }
    }
}

/// Parses `start:stop:count` into evenly spaced points.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(input(format!("grid \"{spec}\" is not start:stop:count")));
    };
    let parse = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
    let (Some(start), Some(stop)) = (parse(start), parse(stop)) else {
        return Err(input(format!("grid \"{spec}\" has a non-numeric endpoint")));
    };
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| input(format!("grid \"{spec}\" has a bad count")))?;
    if count == 0 {
        return Err(input("grid count must be positive"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| if k == count - 1 { stop } else { start + k as f64 * step })
        .collect())
}

/// Moves `theta` strictly inside `domain` when it sits on (or within the
/// margin of) a finite endpoint. Returns the point and whether it moved.
fn clamp_to_domain(theta: f64, domain: &ThetaInterval) -> (f64, bool) {
    let margin = |e: f64| ENDPOINT_MARGIN * e.abs().max(1.0);
    if domain.lower.is_finite() && (theta - domain.lower).abs() <= margin(domain.lower) {
        return (domain.lower + margin(domain.lower), true);
    }
    if domain.upper.is_finite() && (theta - domain.upper).abs() <= margin(domain.upper) {
        return (domain.upper - margin(domain.upper), true);
    }
    (theta, false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub theta: f64,
    pub j_quadratic: Option<f64>,
    pub j_trace: Option<f64>,
    pub j_logdet: Option<f64>,
    pub j_eigen: Option<f64>,
    pub max_rel_disagreement: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct DomainJson {
    lower: Option<f64>,
    upper: Option<f64>,
}

impl From<ThetaInterval> for DomainJson {
    fn from(iv: ThetaInterval) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        DomainJson {
            lower: finite(iv.lower),
            upper: finite(iv.upper),
        }
    }
}

#[derive(Serialize)]
struct GridJson<'a> {
    family: &'a str,
    p: Option<f64>,
    theta0: f64,
    domain: DomainJson,
    rows: &'a [GridRow],
}

fn grid_row(resolved: &ResolvedSegment, anchor: Option<&SpdMatrix>, theta: f64, clamped: bool) -> GridRow {
    let model = resolved.model();
    let mut row = GridRow {
        theta,
        j_quadratic: None,
        j_trace: None,
        j_logdet: None,
        j_eigen: None,
        max_rel_disagreement: None,
        status: String::new(),
    };
    let computed = (|| -> crate::Result<()> {
        row.j_quadratic = Some(model.info_quadratic(theta)?);
        if let (ResolvedSegment::Cov { p, seg, .. }, Some(r)) = (resolved, anchor) {
            let shifted = theta - seg.theta0();
            match p {
                None => {
                    row.j_trace = Some(gaussian_segment_info_trace(seg.c(), seg.d(), theta)?);
                    row.j_logdet = Some(gaussian_segment_info_logdet(seg.c(), seg.d(), theta)?);
                    row.j_eigen = Some(gaussian_segment_info_eigen(seg.c(), r, shifted)?);
                }
                Some(p) => {
                    row.j_trace = Some(wishart_segment_info(*p, seg.c(), seg.d(), theta)?);
                    row.j_logdet = Some(wishart_segment_info_logdet(*p, seg.c(), seg.d(), theta)?);
                    row.j_eigen = Some(wishart_segment_info_eigen(*p, seg.c(), r, shifted)?);
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = computed {
        row.status = format!("error: {e}");
        return row;
    }
    let q = row.j_quadratic.expect("set above");
    let others = [row.j_trace, row.j_logdet, row.j_eigen];
    let worst = others
        .iter()
        .flatten()
        .map(|j| (j - q).abs() / q.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    row.max_rel_disagreement = Some(worst);
    let verdict = if worst < AGREEMENT_TOL { "ok" } else { "disagree" };
    row.status = if clamped {
        format!("{verdict} (clamped)")
    } else {
        verdict.to_string()
    };
    row
}

fn opt_csv(x: Option<f64>) -> String {
    x.map(|v| fmt_g(v, CSV_DIGITS)).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| input(format!("csv output: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| input(format!("csv output: {e}")))
}

/// Evaluates `J(θ)` on the grid by every route available for the family.
pub fn cmd_info_grid(args: &InfoGridArgs) -> CliResult<Vec<u8>> {
    let grid = parse_grid(&args.theta_grid)?;
    let resolved = resolve_segment(&args.segment, args.theta0)?;
    let model = resolved.model();
    let domain = model.domain()?;
    let anchor = match &resolved {
        ResolvedSegment::Cov { seg, .. } => Some(SpdMatrix::new(seg.at(seg.theta0())?)?),
        ResolvedSegment::Mean { .. } => None,
    };
    let rows: Vec<GridRow> = grid
        .par_iter()
        .map(|&t| {
            let (theta, clamped) = clamp_to_domain(t, &domain);
            if !domain.contains(theta) {
                return GridRow {
                    theta: t,
                    j_quadratic: None,
                    j_trace: None,
                    j_logdet: None,
                    j_eigen: None,
                    max_rel_disagreement: None,
                    status: "out-of-domain".into(),
                };
            }
            grid_row(&resolved, anchor.as_ref(), theta, clamped)
        })
        .collect();
    if rows.iter().all(|r| r.status == "out-of-domain") {
        return Err(CliError::EmptyDomain(format!("no grid point lies in {domain}")));
    }
    let family = args.segment.family.map(FamilyArg::as_str).unwrap_or_default();
    let p = match &resolved {
        ResolvedSegment::Cov { p, .. } => *p,
        ResolvedSegment::Mean { .. } => args.segment.p,
    };
    match args.format {
        Format::Json => Ok(to_json_bytes(&GridJson {
            family,
            p,
            theta0: args.theta0,
            domain: domain.into(),
            rows: &rows,
        })),
        Format::Csv => {
            let header = [
                "theta",
                "j_quadratic",
                "j_trace",
                "j_logdet",
                "j_eigen",
                "max_rel_disagreement",
                "status",
            ];
            let records: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_g(r.theta, CSV_DIGITS),
                        opt_csv(r.j_quadratic),
                        opt_csv(r.j_trace),
                        opt_csv(r.j_logdet),
                        opt_csv(r.j_eigen),
                        opt_csv(r.max_rel_disagreement),
                        r.status.clone(),
                    ]
                })
                .collect();
            csv_bytes(&header, &records)
        }
    }
}

#[derive(Serialize)]
struct DomainReport {
    domain: DomainJson,
    theta0: f64,
    spectrum: Vec<f64>,
}

/// Prints the θ interval around the anchor and the anchored spectrum.
pub fn cmd_domain(args: &DomainArgs) -> CliResult<Vec<u8>> {
    let resolved = resolve_segment(&args.segment, args.theta0)?;
    let (domain, spectrum) = match &resolved {
        ResolvedSegment::Cov { seg, .. } => (seg.domain()?, seg.anchored_spectrum()?),
        ResolvedSegment::Mean { model } => (model.domain()?, model.anchored_spectrum(model.theta0())?),
    };
    let scale = spectrum.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let spectrum: Vec<f64> = spectrum
        .into_iter()
        .map(|l| if l.abs() <= 1e-12 * scale { 0.0 } else { l })
        .collect();
    match args.format {
        None => {
            let listed: Vec<String> = spectrum.iter().map(|&l| fmt_g(l, CSV_DIGITS)).collect();
            let end = |x: f64| match x {
                f64::INFINITY => "+inf".to_string(),
                f64::NEG_INFINITY => "-inf".to_string(),
                _ => fmt_g(x, DOMAIN_DIGITS),
            };
            Ok(format!(
                "domain: ({}, {})\ntheta0: {}\nspectrum: {}\n",
                end(domain.lower),
                end(domain.upper),
                fmt_g(args.theta0, CSV_DIGITS),
                listed.join(", ")
            )
            .into_bytes())
        }
        Some(Format::Json) => Ok(to_json_bytes(&DomainReport {
            domain: domain.into(),
            theta0: args.theta0,
            spectrum,
        })),
        Some(Format::Csv) => {
            let mut rows = vec![
                vec!["lower".to_string(), fmt_g(domain.lower, CSV_DIGITS)],
                vec!["upper".to_string(), fmt_g(domain.upper, CSV_DIGITS)],
            ];
            rows.extend(
                spectrum
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| vec![format!("a_{}", j + 1), fmt_g(l, CSV_DIGITS)]),
            );
            csv_bytes(&["quantity", "value"], &rows)
        }
    }
}

fn config_from_flags(args: &EfficiencyArgs) -> CliResult<McConfig> {
    let s = &args.segment;
    let family = s.family.ok_or_else(|| input("--family is required (or --config)"))?;
    let pair = load_pair(s, family)?;
    let (seg_a, seg_b, seg_c, seg_d) = match pair {
        Pair::Mean(a, b) => (Some(a), Some(b), None, None),
        Pair::Cov(c, d) => (None, None, Some(c), Some(d)),
    };
    let estimator = match args.estimator_c.as_deref() {
        None | Some("inverseA") => EstimatorChoice::InverseA,
        Some(path) => EstimatorChoice::Matrix(load_matrix(Path::new(path))?),
    };
    Ok(McConfig {
        family: family.as_str().to_string(),
        p: s.p,
        a: s.noncentrality.as_deref().map(load_matrix).transpose()?,
        u: s.u_file.as_deref().map(load_vector).transpose()?,
        seg_a,
        seg_b,
        seg_c,
        seg_d,
        theta: args.theta.ok_or_else(|| input("--theta is required"))?,
        n: args.n.ok_or_else(|| input("--n is required"))?,
        replicates: args.replicates.ok_or_else(|| input("--replicates is required"))?,
        seed: args.seed.ok_or_else(|| input("--seed is required"))?,
        estimator,
    })
}

fn efficiency_label(e: &Efficiency) -> String {
    match e {
        Efficiency::Verdict(b) => b.to_string(),
        Efficiency::NotApplicable(s) => s.clone(),
    }
}

fn summary_csv(s: &McSummary) -> CliResult<Vec<u8>> {
    let g = |x: f64| fmt_g(x, CSV_DIGITS);
    let (tr, inv) = s
        .trace_diagnostic
        .map(|t| (g(t.trace_over_d2), g(t.inverse_trace_reciprocal)))
        .unwrap_or_default();
    let fields: Vec<(&str, String)> = vec![
        ("family", s.family.clone()),
        ("d", s.d.to_string()),
        ("p", g(s.p)),
        ("theta", g(s.theta)),
        ("n", s.n.to_string()),
        ("replicates", s.replicates.to_string()),
        ("seed", s.seed.to_string()),
        ("estimator", s.estimator.clone()),
        ("estimator_mean", g(s.estimator_mean)),
        ("estimator_mean_se", g(s.estimator_mean_se)),
        ("bias", g(s.bias)),
        ("empirical_variance", g(s.empirical_variance)),
        ("empirical_variance_se", g(s.empirical_variance_se)),
        ("theoretical_variance", g(s.theoretical_variance)),
        ("cramer_rao_bound", g(s.cramer_rao_bound)),
        ("efficiency_ratio", g(s.efficiency_ratio)),
        ("efficiency_ratio_se", g(s.efficiency_ratio_se)),
        ("theoretical_efficiency", g(s.theoretical_efficiency)),
        ("unbiased_within_band", s.unbiased_within_band.to_string()),
        ("variance_within_band", s.variance_within_band.to_string()),
        ("collinear_offset", opt_csv(s.collinear_offset)),
        ("efficient", efficiency_label(&s.efficient)),
        ("trace_over_d2", tr),
        ("inverse_trace_reciprocal", inv),
    ];
    let (header, row): (Vec<&str>, Vec<String>) = fields.into_iter().unzip();
    csv_bytes(&header, &[row])
}

/// Runs a Monte Carlo efficiency experiment and reports its summary.
pub fn cmd_efficiency(args: &EfficiencyArgs) -> CliResult<Vec<u8>> {
    let exp = match &args.config {
        Some(path) => McExperiment::from_json(&read_text(path)?)?,
        None => McExperiment::from_config(&config_from_flags(args)?)?,
    };
    let summary = run_efficiency_experiment(&exp)?;
    match args.format {
        Format::Json => Ok(to_json_bytes(&summary)),
        Format::Csv => summary_csv(&summary),
    }
}

/// Runs the verification suite. Failing checks still produce the report,
/// paired with [`CliError::Verification`].
pub fn cmd_verify(args: &VerifyArgs) -> CliResult<(Vec<u8>, Option<CliError>)> {
    for f in &args.families {
        if !FAMILIES.contains(&f.as_str()) {
            return Err(input(format!(
                "unknown family \"{f}\"; expected one of {}",
                FAMILIES.join(", ")
            )));
        }
    }
    let opts = VerifyOptions {
        families: args.families.clone(),
        inject_fault: args.inject_fault,
    };
    let report = run_verification(&opts)?;
    let failure = (!report.all_passed()).then(|| CliError::Verification(report.failures()));
    Ok((report.render().into_bytes(), failure))
}

/// What the binary should print and return.
#[derive(Debug, Default)]
pub struct CliOutput {
    pub stdout: Vec<u8>,
    pub stderr: String,
    pub code: i32,
}

fn deliver(bytes: Vec<u8>, out: Option<&Path>) -> CliOutput {
    match out {
        None => CliOutput {
            stdout: bytes,
            ..Default::default()
        },
        Some(path) => match fs::write(path, &bytes) {
            Ok(()) => CliOutput::default(),
            Err(e) => CliOutput {
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
                code: EXIT_INPUT,
                ..Default::default()
            },
        },
    }
}

fn failed(e: CliError) -> CliOutput {
    CliOutput {
        stdout: Vec::new(),
        stderr: format!("error: {e}\n"),
        code: e.exit_code(),
    }
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> CliOutput {
    match &cli.command {
        Command::InfoGrid(a) => cmd_info_grid(a).map_or_else(failed, |b| deliver(b, a.out.as_deref())),
        Command::Domain(a) => cmd_domain(a).map_or_else(failed, |b| deliver(b, a.out.as_deref())),
        Command::Efficiency(a) => cmd_efficiency(a).map_or_else(failed, |b| deliver(b, a.out.as_deref())),
        Command::Verify(a) => match cmd_verify(a) {
            Err(e) => failed(e),
            Ok((bytes, failure)) => {
                let mut out = deliver(bytes, a.out.as_deref());
                if let (Some(e), 0) = (failure, out.code) {
                    out.stderr = format!("error: {e}\n");
                    out.code = e.exit_code();
                }
                out
            }
        },
    }
}
