//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::Parser;
use common::{random_spd, random_sym, rng};
use rand::Rng;
use segfisher::cli::{cmd_efficiency, Cli, Command as CliCommand};
use segfisher::estimate::score::{mc_gaussian_segment_info, mc_wishart_segment_info};
use segfisher::estimate::{
    cramer_rao_bound, run_efficiency_experiment, theta_hat_variance, Efficiency, EstimatorChoice, FamilySpec,
    McExperiment, RngStream,
};
use segfisher::fd;
use segfisher::gaussian::{
    circulant_info, circulant_matrix, gaussian_segment_info_eigen, gaussian_segment_info_logdet,
    gaussian_segment_info_trace, tridiag_info, tridiagonal_matrix,
};
use segfisher::noncentral::{nc_isotropic_info, nc_segment_info};
use segfisher::segment::ThetaInterval;
use segfisher::wishart::{
    wishart_circulant_info, wishart_segment_info, wishart_segment_info_eigen, wishart_segment_info_logdet,
    wishart_tridiag_info,
};
use segfisher::{
    CovSegment, ExponentialFamily, GaussianFamily, Matrix, NcWishartFamily, SegmentModel, SpdMatrix, SymMatrix,
    WishartFamily,
};

const FD_TOL: f64 = 1e-5;
const CLOSED_TOL: f64 = 1e-10;
const BAND: f64 = 3.0;

/// Worst residuals and individual failures collected by a criterion.
#[derive(Default)]
struct Tally {
    checks: usize,
    worst: Vec<(&'static str, f64, f64)>,
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Tally {
    /// Records `value ≤ tol` under the metric `label`.
    fn check(&mut self, label: &'static str, value: f64, tol: f64, context: impl FnOnce() -> String) {
        self.checks += 1;
        match self.worst.iter_mut().find(|(l, _, _)| *l == label) {
            Some(entry) => entry.1 = entry.1.max(value),
            None => self.worst.push((label, value, tol)),
        }
        if value.is_nan() || value > tol {
            self.failures
                .push(format!("{label} = {value:.3e} > {tol:.0e} at {}", context()));
        }
    }

    fn fail(&mut self, what: String) {
        self.checks += 1;
        self.failures.push(what);
    }

    fn summary(&self) -> String {
        let mut parts: Vec<String> = self
            .worst
            .iter()
            .map(|(l, v, t)| format!("{l} {v:.2e} (tol {t:.0e})"))
            .collect();
        parts.extend(self.notes.iter().cloned());
        format!("{} checks; {}", self.checks, parts.join(", "))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn rel_matrix(a: &Matrix, b: &Matrix) -> f64 {
    a.max_abs_diff(b).expect("same shape") / b.max_abs()
}

/// Finite window of a domain: infinite ends are capped ten units past the
/// finite end (or past zero).
fn capped(domain: &ThetaInterval) -> (f64, f64) {
    match (domain.lower.is_finite(), domain.upper.is_finite()) {
        (true, true) => (domain.lower, domain.upper),
        (true, false) => (domain.lower, domain.lower.max(0.0) + 10.0),
        (false, true) => (domain.upper.min(0.0) - 10.0, domain.upper),
        (false, false) => (-10.0, 10.0),
    }
}

/// 25 points covering the inner 90% of the capped domain.
fn grid25(domain: &ThetaInterval) -> Vec<f64> {
    let (lo, hi) = capped(domain);
    let w = hi - lo;
    (0..25).map(|k| lo + w * (0.05 + 0.9 * k as f64 / 24.0)).collect()
}

fn inner_point<R: Rng>(domain: &ThetaInterval, r: &mut R) -> f64 {
    let (lo, hi) = capped(domain);
    lo + (hi - lo) * (0.2 + 0.6 * r.random::<f64>())
}

/// `None` is the Gaussian family, `Some(p)` the Wishart family of shape `p`.
fn segment_model(p: Option<f64>, seg: &CovSegment) -> SegmentModel {
    match p {
        None => seg
            .gaussian_mean_segment(Arc::new(GaussianFamily::centered(seg.dim()).unwrap()))
            .unwrap(),
        Some(p) => Arc::new(WishartFamily::new(seg.dim(), p).unwrap())
            .mean_segment(seg)
            .unwrap(),
    }
}

fn trace_route(p: Option<f64>, c: &SymMatrix, d: &SymMatrix, theta: f64) -> f64 {
    match p {
        None => gaussian_segment_info_trace(c, d, theta),
        Some(p) => wishart_segment_info(p, c, d, theta),
    }
    .unwrap()
}

#[derive(Clone, Copy)]
enum Structure {
    Circulant,
    Tridiagonal,
    Random,
}

fn structured_info(p: Option<f64>, s: Structure, d: usize, theta: f64) -> Option<f64> {
    let v = match (s, p) {
        (Structure::Circulant, None) => circulant_info(d, theta),
        (Structure::Circulant, Some(p)) => wishart_circulant_info(p, d, theta),
        (Structure::Tridiagonal, None) => tridiag_info(d, theta),
        (Structure::Tridiagonal, Some(p)) => wishart_tridiag_info(p, d, theta),
        (Structure::Random, _) => return None,
    };
    Some(v.unwrap())
}

fn criterion_1() -> Tally {
    let mut t = Tally::default();
    let mut r = rng(1001);
    let families = [None, Some(0.5), Some(1.0), Some(2.5)];
    for d in [1usize, 2, 3, 4, 6] {
        let mut cases = Vec::new();
        if d >= 3 {
            cases.push((
                Structure::Circulant,
                circulant_matrix(d).unwrap(),
                SymMatrix::identity(d),
            ));
        }
        if d >= 2 {
            cases.push((
                Structure::Tridiagonal,
                tridiagonal_matrix(d).unwrap(),
                SymMatrix::identity(d),
            ));
        }
        for _ in 0..10 {
            cases.push((
                Structure::Random,
                random_sym(d, &mut r),
                random_spd(d, 0.3, &mut r).into_sym(),
            ));
        }
        for (structure, c, dm) in &cases {
            let seg = CovSegment::new(c.clone(), dm.clone(), 0.0).unwrap();
            let anchor = SpdMatrix::new(dm.clone()).unwrap();
            let grid = grid25(&seg.domain().unwrap());
            for p in families {
                let model = segment_model(p, &seg);
                for &theta in &grid {
                    let ctx = || format!("d={d} p={p:?} θ={theta}");
                    let trace = trace_route(p, c, dm, theta);
                    let quad = model.info_quadratic(theta).unwrap();
                    let eigen = match p {
                        None => gaussian_segment_info_eigen(c, &anchor, theta),
                        Some(p) => wishart_segment_info_eigen(p, c, &anchor, theta),
                    }
                    .unwrap();
                    let logdet = match p {
                        None => gaussian_segment_info_logdet(c, dm, theta),
                        Some(p) => wishart_segment_info_logdet(p, c, dm, theta),
                    }
                    .unwrap();
                    let cumulant = model.info_cumulant(theta).unwrap();
                    t.check("closed-form", rel(quad, trace), CLOSED_TOL, ctx);
                    t.check("closed-form", rel(eigen, trace), CLOSED_TOL, ctx);
                    if let Some(s) = structured_info(p, *structure, d, theta) {
                        t.check("closed-form", rel(s, trace), CLOSED_TOL, ctx);
                    }
                    t.check("fd-route", rel(logdet, trace), FD_TOL, ctx);
                    t.check("fd-route", rel(cumulant, trace), FD_TOL, ctx);
                }
            }
        }
    }
    t
}

fn criterion_2() -> Tally {
    let mut t = Tally::default();
    let circ = circulant_matrix(4).unwrap();
    let i4 = SymMatrix::identity(4);
    t.check(
        "gaussian circulant",
        rel(gaussian_segment_info_trace(&circ, &i4, 0.0).unwrap(), 4.0),
        CLOSED_TOL,
        || "d=4".into(),
    );
    for p in [0.5, 1.0, 2.5] {
        let j = wishart_segment_info(p, &circ, &i4, 0.0).unwrap();
        t.check("wishart circulant", rel(j, 2.0 * p * 4.0), CLOSED_TOL, || {
            format!("p={p}")
        });
    }
    let tri = tridiagonal_matrix(3).unwrap();
    let j = gaussian_segment_info_trace(&tri, &SymMatrix::identity(3), 0.0).unwrap();
    t.check("gaussian tridiagonal", rel(j, 2.0), CLOSED_TOL, || "d=3".into());
    t
}

fn criterion_3() -> Tally {
    let mut t = Tally::default();
    let mut r = rng(1003);
    for _ in 0..100 {
        let d = r.random_range(1..=4);
        let c = random_sym(d, &mut r);
        let dm = random_spd(d, 0.3, &mut r).into_sym();
        let seg = CovSegment::new(c.clone(), dm.clone(), 0.0).unwrap();
        let theta = inner_point(&seg.domain().unwrap(), &mut r);
        let ctx = || format!("d={d} θ={theta}");
        let g = segment_model(None, &seg).info_quadratic(theta).unwrap();
        let w = segment_model(Some(0.5), &seg).info_quadratic(theta).unwrap();
        t.check("quadratic", rel(w, g), 1e-12, ctx);
        let g = trace_route(None, &c, &dm, theta);
        let w = trace_route(Some(0.5), &c, &dm, theta);
        t.check("trace", rel(w, g), 1e-12, ctx);
    }
    t
}

fn cumulant_oracles(t: &mut Tally, fam: &dyn ExponentialFamily, s: &SymMatrix, tag: String) {
    let k = |x: &SymMatrix| fam.cumulant(x);
    let m = fam.mean_map(s).unwrap();
    let grad = fd::gradient(k, s, fd::first_order_step(s)).unwrap();
    t.check("gradient", rel_matrix(grad.as_matrix(), m.as_matrix()), 1e-5, || {
        tag.clone()
    });
    let hess = fd::hessian_forms(k, s, fd::second_order_step(s)).unwrap();
    let v = fd::bilinear_forms(&fam.variance_function(&m).unwrap(), s.dim()).unwrap();
    t.check("hessian", rel_matrix(&hess, &v), 1e-4, || tag.clone());
    let back = fam.inverse_mean_map(&m).unwrap();
    t.check("round trip", rel_matrix(back.as_matrix(), s.as_matrix()), 1e-9, || {
        tag.clone()
    });
}

fn criterion_4() -> Tally {
    let mut t = Tally::default();
    let mut r = rng(1004);
    for d in [1usize, 2, 3] {
        for _ in 0..5 {
            let fam = GaussianFamily::centered(d).unwrap();
            let s = random_spd(d, 0.5, &mut r).into_sym();
            cumulant_oracles(&mut t, &fam, &s, format!("gaussian d={d}"));
            for p in [1.0, 2.5] {
                let fam = WishartFamily::new(d, p).unwrap();
                let s = random_spd(d, 0.5, &mut r).into_sym().scale(-1.0);
                cumulant_oracles(&mut t, &fam, &s, format!("wishart d={d} p={p}"));
            }
            for p in [1.0, 2.0] {
                let fam = NcWishartFamily::new(p, random_spd(d, 0.2, &mut r).into_sym()).unwrap();
                let s = random_spd(d, 0.5, &mut r).into_sym().scale(-1.0);
                cumulant_oracles(&mut t, &fam, &s, format!("ncwishart d={d} p={p}"));
            }
        }
    }
    t
}

fn criterion_5() -> Tally {
    let mut t = Tally::default();
    for d in [1usize, 2, 3] {
        for p in [1.0, 2.0] {
            for alpha in [0.5, 1.0, 2.0] {
                for beta in [0.5, 1.0, 2.0] {
                    let a = SymMatrix::identity(d);
                    let (dir, off) = (SymMatrix::scalar(d, alpha), SymMatrix::scalar(d, beta));
                    let domain = ThetaInterval::new(-beta / alpha, f64::INFINITY).unwrap();
                    for theta in grid25(&domain) {
                        let generic = nc_segment_info(p, &a, &dir, &off, theta).unwrap();
                        let closed = nc_isotropic_info(p, d, alpha, beta, theta).unwrap();
                        t.check("relative", rel(generic, closed), 1e-8, || {
                            format!("d={d} p={p} α={alpha} β={beta} θ={theta}")
                        });
                    }
                }
            }
        }
    }
    t
}

fn score_check(t: &mut Tally, m: segfisher::estimate::ScalarMoments, j: f64, tag: String) {
    t.check("variance z", (m.variance - j).abs() / m.variance_se, BAND, || {
        format!("{tag} J={j}")
    });
    t.check("mean z", m.mean.abs() / m.mean_se, BAND, || tag.clone());
}

fn criterion_6() -> Tally {
    let mut t = Tally::default();
    let mut r = rng(1006);
    const N: usize = 100_000;
    let mut stream = 0;
    for d in [1usize, 2, 3] {
        let seg = CovSegment::new(random_sym(d, &mut r), random_spd(d, 0.3, &mut r).into_sym(), 0.0).unwrap();
        let theta = inner_point(&seg.domain().unwrap(), &mut r);
        let u: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        stream += 1;
        let m = mc_gaussian_segment_info(&seg, theta, &u, N, RngStream::new(1006, stream)).unwrap();
        score_check(
            &mut t,
            m,
            gaussian_segment_info_trace(seg.c(), seg.d(), theta).unwrap(),
            format!("gaussian d={d}"),
        );
        for p in [1.0, 1.5] {
            stream += 1;
            let m = mc_wishart_segment_info(p, &seg, theta, N, RngStream::new(1006, stream)).unwrap();
            let j = wishart_segment_info(p, seg.c(), seg.d(), theta).unwrap();
            score_check(&mut t, m, j, format!("wishart d={d} p={p}"));
        }
    }
    t
}

fn criterion_7() -> Tally {
    let mut t = Tally::default();
    let mut r = rng(1007);
    let (n, reps) = (1000, 1000);
    let mut configs = Vec::new();
    for (d, p) in [(2usize, 1.5), (3, 2.5)] {
        let a = random_spd(d, 0.3, &mut r).into_sym();
        for c in [0.0, 1.0] {
            configs.push((FamilySpec::Wishart { p }, a.clone(), a.scale(c), c, 0.8, p, d));
        }
    }
    for d in [2usize, 3] {
        let cov_dir = random_spd(d, 0.3, &mut r).into_sym();
        let u: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        for c in [0.0, 1.0] {
            // covariance segment θC + cC as the mean segment A = -C/2, B = -cC/2
            let a = cov_dir.scale(-0.5);
            configs.push((
                FamilySpec::Gaussian { u: u.clone() },
                a.clone(),
                a.scale(c),
                c,
                1.3,
                0.5,
                d,
            ));
        }
    }
    for (k, (family, a, b, c, theta, p, d)) in configs.into_iter().enumerate() {
        let tag = format!("{} d={d} c={c}", family.name());
        let exp = McExperiment::new(family, a, b, theta, n, reps, 2000 + k as u64, EstimatorChoice::InverseA).unwrap();
        let s = run_efficiency_experiment(&exp).unwrap();
        let exact = (theta + c).powi(2) / (p * d as f64 * n as f64);
        t.check("variance formula", rel(s.theoretical_variance, exact), 1e-12, || {
            tag.clone()
        });
        t.check("bound formula", rel(s.cramer_rao_bound, exact), 1e-12, || tag.clone());
        t.check(
            "ratio z",
            (s.efficiency_ratio - 1.0).abs() / s.efficiency_ratio_se,
            BAND,
            || tag.clone(),
        );
        if s.efficient != Efficiency::Verdict(true) {
            t.fail(format!("{tag}: reported {:?}", s.efficient));
        }
    }
    t
}

fn criterion_8() -> Tally {
    let mut t = Tally::default();
    let mut r = rng(1008);
    let mut equalities = 0;
    for k in 0..100 {
        let d = r.random_range(1..=4);
        let a = random_sym(d, &mut r);
        let b = random_spd(d, 0.3, &mut r).into_sym();
        let (fam, b): (Arc<dyn ExponentialFamily>, SymMatrix) = match k % 3 {
            0 => (Arc::new(GaussianFamily::centered(d).unwrap()), b.scale(-1.0)),
            1 => (Arc::new(WishartFamily::new(d, 1.5).unwrap()), b),
            _ => (
                Arc::new(NcWishartFamily::new(2.0, random_spd(d, 0.2, &mut r).into_sym()).unwrap()),
                b,
            ),
        };
        let seg = SegmentModel::new(fam, a, b, 0.0).unwrap();
        let theta = inner_point(&seg.domain().unwrap(), &mut r);
        let c = random_sym(d, &mut r);
        let var = theta_hat_variance(&seg, &c, theta, 1).unwrap();
        let bound = cramer_rao_bound(&seg, theta, 1).unwrap();
        // d = 1 is an equality case, where rounding can land a few ulps either side of one
        t.check("bound/variance - 1", bound / var - 1.0, 4.0 * f64::EPSILON, || {
            format!("triple {k} d={d}")
        });
        if (bound / var - 1.0).abs() <= 4.0 * f64::EPSILON {
            equalities += 1;
        }
    }
    t.notes.push(format!("{equalities} equality cases"));
    t
}

fn criterion_9() -> Tally {
    let mut t = Tally::default();
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"family":"wishart","p":1.5,"A":{"rows":2,"cols":2,"data":[1,0.3,0.3,2]},
            "B":{"rows":2,"cols":2,"data":[1,0,0,1]},"theta":0.7,"n":100,"replicates":500,"seed":42}"#,
    )
    .unwrap();
    let cli = Cli::try_parse_from(["segfisher", "efficiency", "--config", cfg.to_str().unwrap()]).unwrap();
    let CliCommand::Efficiency(args) = &cli.command else {
        unreachable!()
    };
    let first = cmd_efficiency(args).unwrap();
    let second = cmd_efficiency(args).unwrap();
    t.checks += 1;
    if first != second {
        t.failures.push("in-process runs differ".into());
    }
    for threads in ["1", "4"] {
        let out = Command::new(env!("CARGO_BIN_EXE_segfisher"))
            .args(["efficiency", "--config", cfg.to_str().unwrap()])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        t.checks += 1;
        if out.stdout != first {
            t.failures.push(format!(
                "binary output with {threads} thread(s) differs from in-process output"
            ));
        }
    }
    t
}

/// Name, check and optional runtime budget in seconds.
type Criterion = (&'static str, fn() -> Tally, Option<u64>);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 four-way formula agreement", criterion_1, Some(10)),
        ("2 closed-form anchors", criterion_2, None),
        ("3 p = 1/2 equivalence", criterion_3, None),
        ("4 cumulant oracles", criterion_4, None),
        ("5 noncentral isotropic closed form", criterion_5, None),
        ("6 Monte Carlo information", criterion_6, Some(60)),
        ("7 efficiency theorem", criterion_7, Some(120)),
        ("8 Cramér-Rao dominance", criterion_8, None),
        ("9 determinism", criterion_9, None),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let mut tally = run();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            if elapsed > Duration::from_secs(limit) {
                tally.failures.push(format!("runtime {elapsed:.1?} exceeds {limit} s"));
            }
        }
        let verdict = if tally.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {} [{elapsed:.2?}]", tally.summary());
        for f in &tally.failures {
            println!("    {f}");
        }
        if !tally.failures.is_empty() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
