//! Experiment plumbing behind the `gsts` binary: method tags, experiment
//! specs, report rows (CSV and markdown) and the table reproduction runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, gsor_optimal_parameters, Analysis, ANALYSIS_CAP};
use crate::error::{Error, Result};
use crate::linalg::LinearOperator;
use crate::problem::{
    load_system, mac_stokes_benchmark, random_rank_deficient, save_system, SaddleSystem,
    StokesConfig,
};
use crate::solvers::{
    gmres_solve, gsts_solve, sweep_points, GstsCase, IterationReport, SolveStatus, SolverConfig,
    SweepResult,
};
use crate::splitting::{
    build_b, ConstraintPreconditioner, GstsParams, GstsPreconditioner, HssPreconditioner, PChoice,
};

/// Largest grid size accepted by `analyze` on the Stokes benchmark.
pub const ANALYZE_MAX_L: usize = 12;
/// Restart length used for the preconditioned GMRES table.
pub const PRECONDITIONED_RESTART: usize = 10;
/// Iteration cap for each HSS run inside the α search.
pub const HSS_SWEEP_MAX_ITERATIONS: usize = 500;

/// Preconditioners available to GMRES.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precond {
    Gsts(GstsCase),
    Constraint(PChoice),
    Hss,
}

impl Precond {
    pub fn tag(self) -> &'static str {
        match self {
            Precond::Gsts(c) => c.tag(),
            Precond::Constraint(PChoice::Diagonal) => "cp-i",
            Precond::Constraint(PChoice::Tridiagonal) => "cp-ii",
            Precond::Hss => "hss",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Precond::Gsts(c) => c.label(),
            Precond::Constraint(PChoice::Diagonal) => "CP I",
            Precond::Constraint(PChoice::Tridiagonal) => "CP II",
            Precond::Hss => "HSS",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        if let Some(c) = GstsCase::from_tag(tag) {
            return Some(Precond::Gsts(c));
        }
        match tag {
            "cp-i" => Some(Precond::Constraint(PChoice::Diagonal)),
            "cp-ii" => Some(Precond::Constraint(PChoice::Tridiagonal)),
            "hss" => Some(Precond::Hss),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Stationary(GstsCase),
    Gmres(Option<Precond>),
    /// Reserved tag; running it reports [`Error::Unsupported`].
    Qmr,
}

impl Method {
    /// Accepts `gsts-i … gsor-ii`, `gmres`, `gmres+<precond>`, the bare
    /// preconditioner tags `cp-i`, `cp-ii`, `hss` (run under GMRES) and `qmr`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let tag = tag.trim().to_ascii_lowercase();
        if let Some(c) = GstsCase::from_tag(&tag) {
            return Ok(Method::Stationary(c));
        }
        if tag == "gmres" {
            return Ok(Method::Gmres(None));
        }
        if tag == "qmr" {
            return Ok(Method::Qmr);
        }
        let inner = tag.strip_prefix("gmres+").unwrap_or(&tag);
        match Precond::from_tag(inner) {
            Some(Precond::Gsts(c)) if inner == tag => Ok(Method::Stationary(c)),
            Some(p) => Ok(Method::Gmres(Some(p))),
            None => Err(Error::InvalidParameter(format!(
                "unknown method tag '{tag}'; expected gsts-i, gsts-ii, gsts-iii, gsor-i, gsor-ii, \
                 gmres, gmres+<gsts-i|gsts-ii|gsts-iii|gsor-i|gsor-ii|cp-i|cp-ii|hss>, or qmr"
            ))),
        }
    }

    pub fn tag(self) -> String {
        match self {
            Method::Stationary(c) => c.tag().to_string(),
            Method::Gmres(None) => "gmres".into(),
            Method::Gmres(Some(p)) => format!("gmres+{}", p.tag()),
            Method::Qmr => "qmr".into(),
        }
    }

    pub fn label(self) -> String {
        match self {
            Method::Stationary(c) => c.label().to_string(),
            Method::Gmres(None) => "GMRES".into(),
            Method::Gmres(Some(p)) => format!("GMRES+{}", p.label()),
            Method::Qmr => "QMR".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Stokes { l: usize, nu: f64 },
    /// Directory written by `generate`.
    Files(PathBuf),
    /// A system already held by the caller; only labels the report row.
    InMemory,
}

impl ProblemSource {
    pub fn load(&self) -> Result<SaddleSystem> {
        match self {
            ProblemSource::Stokes { l, nu } => mac_stokes_benchmark(&StokesConfig::new(*l, *nu)?),
            ProblemSource::Files(dir) => {
                let (sys, _) = load_system(dir)?;
                sys.validate()?;
                Ok(sys)
            }
            ProblemSource::InMemory => Err(Error::InvalidParameter(
                "an in-memory problem has no source to load".into(),
            )),
        }
    }

    fn grid(&self) -> (Option<usize>, Option<f64>) {
        match self {
            ProblemSource::Stokes { l, nu } => (Some(*l), Some(*nu)),
            ProblemSource::Files(dir) => load_system(dir)
                .map(|(_, m)| (m.l, m.nu))
                .unwrap_or((None, None)),
            ProblemSource::InMemory => (None, None),
        }
    }
}

/// Parameters as given on the command line. For GSTS cases `omega` is ω₂
/// and `tau` is τ (with ω₁ = τ unless `omega1` is set); for GSOR cases
/// `omega` is the relaxation factor and `tau` the step ν_g.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MethodParams {
    pub omega: Option<f64>,
    pub omega1: Option<f64>,
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub problem: ProblemSource,
    pub method: Method,
    pub params: MethodParams,
    pub solver: SolverConfig,
}

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub l: Option<usize>,
    pub nu: Option<f64>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub tau: Option<f64>,
    pub nu_g: Option<f64>,
    pub alpha: Option<f64>,
    pub restart: Option<usize>,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub final_residual: f64,
    pub status: String,
}

impl ReportRow {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged.as_str()
    }

    /// The two tabulated parameter columns (ω, τ) as displayed.
    pub fn display_params(&self) -> (String, String) {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        if let Some(a) = self.alpha {
            return (format!("α={a:.3e}"), "-".into());
        }
        if let Some(nu_g) = self.nu_g {
            return (f(self.omega1), format!("{nu_g:.4}"));
        }
        (f(self.omega2), f(self.tau))
    }
}

/// Resolved parameters of a GSTS-family case: `(col1, col2)` plus an
/// optional explicit ω₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    pub col1: f64,
    pub col2: f64,
    pub omega1: Option<f64>,
}

/// GSOR cases default to the closed-form optimum; GSTS cases need both
/// columns.
pub fn resolve_case_params(
    sys: &SaddleSystem,
    case: GstsCase,
    params: &MethodParams,
) -> Result<CaseParams> {
    let (col1, col2) = match (params.omega, params.tau) {
        (Some(a), Some(b)) => (a, b),
        _ if case.is_gsor() => {
            let pc = case.p_choice().expect("GSOR cases carry a P choice");
            let opt = gsor_optimal_parameters(sys, pc)?;
            (params.omega.unwrap_or(opt.omega), params.tau.unwrap_or(opt.nu_g))
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "{} needs --omega2 (ω) and --tau",
                case.tag()
            )))
        }
    };
    Ok(CaseParams {
        col1,
        col2,
        omega1: params.omega1,
    })
}

fn case_preconditioner(
    sys: &SaddleSystem,
    case: GstsCase,
    cp: CaseParams,
) -> Result<(GstsPreconditioner, GstsParams, Option<f64>)> {
    let (choice, mut gp) = case.configure(cp.col1, cp.col2)?;
    if let Some(w1) = cp.omega1 {
        gp = GstsParams::new(w1, gp.omega2, gp.tau)?;
    }
    let nu_g = case.is_gsor().then_some(cp.col2);
    let b = build_b(sys, &choice, gp.tau)?;
    Ok((GstsPreconditioner::new(sys, b, gp)?, gp, nu_g))
}

/// HSS α from a log-spaced search `10^(k/4)`, `k = −24 … 8`: fewest
/// iterations, ties to the smaller α.
pub fn hss_best_alpha(sys: &SaddleSystem, cfg: &SolverConfig) -> Result<f64> {
    let capped = cfg
        .clone()
        .with_max_iterations(cfg.max_iterations.min(HSS_SWEEP_MAX_ITERATIONS));
    let f = sys.rhs();
    let runs: Vec<(f64, Option<usize>)> = (-24..=8)
        .into_par_iter()
        .map(|k| {
            let alpha = 10f64.powf(k as f64 / 4.0);
            let it = HssPreconditioner::new(sys, alpha)
                .and_then(|pre| gmres_solve(sys, &f, Some(&pre), &capped))
                .ok()
                .filter(|r| r.converged)
                .map(|r| r.iterations);
            (alpha, it)
        })
        .collect();
    runs.iter()
        .filter_map(|&(a, it)| it.map(|i| (i, a)))
        .min_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)))
        .map(|(_, a)| a)
        .ok_or_else(|| Error::SweepFailed("no HSS alpha converged".into()))
}

fn row_from(
    method: Method,
    problem: &ProblemSource,
    report: &IterationReport,
    gp: Option<GstsParams>,
    nu_g: Option<f64>,
    alpha: Option<f64>,
    restart: Option<usize>,
) -> ReportRow {
    let (l, nu) = problem.grid();
    ReportRow {
        method: method.tag(),
        l,
        nu,
        omega1: gp.map(|p| p.omega1),
        omega2: gp.map(|p| p.omega2),
        tau: gp.map(|p| p.tau),
        nu_g,
        alpha,
        restart,
        iterations: report.iterations,
        wall_seconds: report.wall_seconds,
        final_residual: report.final_residual(),
        status: report.status.as_str().to_string(),
    }
}

/// Runs one experiment on an already loaded system.
pub fn run_on(sys: &SaddleSystem, spec: &ExperimentSpec) -> Result<ReportRow> {
    let cfg = &spec.solver;
    match spec.method {
        Method::Qmr => Err(qmr_unsupported()),
        Method::Stationary(case) => {
            let cp = resolve_case_params(sys, case, &spec.params)?;
            let (pre, gp, nu_g) = case_preconditioner(sys, case, cp)?;
            let report = gsts_solve(sys, pre.b(), gp, cfg)?;
            Ok(row_from(spec.method, &spec.problem, &report, Some(gp), nu_g, None, None))
        }
        Method::Gmres(precond) => {
            let f = sys.rhs();
            let (report, gp, nu_g, alpha) = match precond {
                None => (gmres_solve(sys, &f, None, cfg)?, None, None, None),
                Some(Precond::Gsts(case)) => {
                    let cp = resolve_case_params(sys, case, &spec.params)?;
                    let (pre, gp, nu_g) = case_preconditioner(sys, case, cp)?;
                    (gmres_solve(sys, &f, Some(&pre as &dyn LinearOperator), cfg)?, Some(gp), nu_g, None)
                }
                Some(Precond::Constraint(pc)) => {
                    let pre = ConstraintPreconditioner::new(sys, pc)?;
                    (gmres_solve(sys, &f, Some(&pre), cfg)?, None, None, None)
                }
                Some(Precond::Hss) => {
                    let alpha = match spec.params.alpha {
                        Some(a) => a,
                        None => hss_best_alpha(sys, cfg)?,
                    };
                    let pre = HssPreconditioner::new(sys, alpha)?;
                    (gmres_solve(sys, &f, Some(&pre), cfg)?, None, None, Some(alpha))
                }
            };
            Ok(row_from(spec.method, &spec.problem, &report, gp, nu_g, alpha, cfg.restart))
        }
    }
}

pub fn cmd_run(spec: &ExperimentSpec) -> Result<ReportRow> {
    if spec.method == Method::Qmr {
        return Err(qmr_unsupported());
    }
    run_on(&spec.problem.load()?, spec)
}

fn qmr_unsupported() -> Error {
    Error::Unsupported("the qmr method tag is reserved but not implemented; use gmres".into())
}

/// Writes `M.mtx`, `E.mtx`, `f.vec` and `manifest.txt` for the benchmark.
pub fn cmd_generate(l: usize, nu: f64, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let cfg = StokesConfig::new(l, nu)?;
    let sys = mac_stokes_benchmark(&cfg)?;
    fs::create_dir_all(out_dir.as_ref())?;
    save_system(&sys, Some(&cfg), out_dir)
}

/// Writes a random consistent system with `rank(E) = rank`.
pub fn cmd_generate_random(
    p: usize,
    q: usize,
    rank: usize,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let sys = random_rank_deficient(p, q, rank, seed)?;
    fs::create_dir_all(out_dir.as_ref())?;
    save_system(&sys, None, out_dir)
}

/// Grid points from a CSV file with columns `col1,col2` (header optional).
pub fn read_grid_file(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| rec.get(i).and_then(|s| s.parse::<f64>().ok());
        match (parse(0), parse(1), rec.len()) {
            (Some(a), Some(b), 2) => out.push((a, b)),
            _ if k == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: k + 1,
                    message: "expected two numeric columns col1,col2".into(),
                })
            }
        }
    }
    Ok(out)
}

pub fn cmd_sweep(
    problem: &ProblemSource,
    case: GstsCase,
    points: &[(f64, f64)],
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    sweep_points(&problem.load()?, case, points, cfg)
}

#[derive(Debug, Serialize)]
struct SweepCsvRow {
    col1: f64,
    col2: f64,
    omega1: f64,
    omega2: f64,
    tau: f64,
    iterations: usize,
    final_residual: f64,
    status: &'static str,
}

pub fn sweep_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &result.table {
        w.serialize(SweepCsvRow {
            col1: p.col1,
            col2: p.col2,
            omega1: p.params.omega1,
            omega2: p.params.omega2,
            tau: p.params.tau,
            iterations: p.iterations,
            final_residual: p.final_residual,
            status: p.status.as_str(),
        })?;
    }
    csv_string(w)
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Spectral analysis of one stationary configuration.
pub fn cmd_analyze(
    problem: &ProblemSource,
    case: GstsCase,
    params: &MethodParams,
) -> Result<Analysis> {
    if let ProblemSource::Stokes { l, .. } = problem {
        if *l > ANALYZE_MAX_L {
            return Err(Error::InvalidParameter(format!(
                "analysis materializes dense matrices; use l <= {ANALYZE_MAX_L} (got {l})"
            )));
        }
    }
    let sys = problem.load()?;
    if sys.n() > ANALYSIS_CAP {
        return Err(Error::SizeCapExceeded {
            what: "system for analysis (use a smaller l)",
            size: sys.n(),
            cap: ANALYSIS_CAP,
        });
    }
    let cp = resolve_case_params(&sys, case, params)?;
    let (choice, mut gp) = case.configure(cp.col1, cp.col2)?;
    if let Some(w1) = cp.omega1 {
        gp = GstsParams::new(w1, gp.omega2, gp.tau)?;
    }
    analyze(&sys, &choice, gp)
}

fn fmt_interval(upper: Option<f64>) -> String {
    upper.map_or("empty".to_string(), |u| format!("(0, {u:.12e})"))
}

/// Plain-text report; identical inputs give identical bytes.
pub fn render_analysis(a: &Analysis) -> String {
    let r = &a.report;
    let yn = |b: bool| if b { "yes" } else { "no" };
    let mut s = String::new();
    let _ = writeln!(s, "regime: {}", a.regime.as_str());
    let _ = writeln!(
        s,
        "parameters: omega1={} omega2={} tau={} omega_tilde={:.12e}",
        a.params.omega1, a.params.omega2, a.params.tau, a.bound.omega_tilde
    );
    let _ = writeln!(s, "gamma: {:.12e}", r.gamma);
    let _ = writeln!(s, "spectral_radius: {:.12e}", r.spectral_radius);
    let _ = writeln!(s, "unit_eigenvalues: {}", r.unit_eigenvalues);
    let _ = writeln!(
        s,
        "index_one: {} (rank(I-G)={}, rank((I-G)^2)={})",
        yn(r.index_one),
        r.rank_i_minus_g,
        r.rank_i_minus_g_sq
    );
    if r.rank_gap_warning {
        let _ = writeln!(s, "warning: singular-value gap at the rank cut is below 1e-6");
    }
    match (r.nullspace_ok, r.nullspace_angle) {
        (None, _) => {
            let _ = writeln!(s, "nullspace_ok: n/a");
        }
        (Some(ok), angle) => {
            let angle = angle.map_or("dimension mismatch".to_string(), |t| format!("{t:.3e} rad"));
            let _ = writeln!(s, "nullspace_ok: {} (max principal angle {angle})", yn(ok));
        }
    }
    let _ = writeln!(s, "semiconvergent: {}", yn(r.semiconvergent()));
    let rg = &a.ranges;
    let _ = writeln!(s, "alpha_range: [{:.12e}, {:.12e}]", rg.alpha.0, rg.alpha.1);
    let _ = writeln!(
        s,
        "beta_range (V1' B V1): [{:.12e}, {:.12e}]",
        rg.beta_block.0, rg.beta_block.1
    );
    let _ = writeln!(
        s,
        "beta_range (inv(V1' B° V1)): [{:.12e}, {:.12e}]",
        rg.beta_schur.0, rg.beta_schur.1
    );
    let _ = writeln!(
        s,
        "beta_range used (hull): [{:.12e}, {:.12e}]",
        a.bound.beta_range.0, a.bound.beta_range.1
    );
    let _ = writeln!(
        s,
        "tau_interval (corner pairing): {}; tau inside: {}",
        fmt_interval(a.bound.upper),
        yn(a.bound.sufficient)
    );
    let _ = writeln!(
        s,
        "tau_interval (common z, beta/alpha in [{:.12e}, {:.12e}]): {}; tau inside: {}",
        a.joint.ratio_range.0,
        a.joint.ratio_range.1,
        fmt_interval(a.joint.upper),
        yn(a.joint.sufficient)
    );
    let _ = writeln!(
        s,
        "tau_interval (corner pairing, capped by uncoupled eigenvalue 1 - tau): {}; tau inside: {}",
        fmt_interval(a.bound.capped_upper()),
        yn(a.bound.capped_upper().is_some_and(|u| a.params.tau < u))
    );
    s
}

pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    csv_string(w)
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Markdown table with columns method, ω, τ, IT, CPU, RES.
pub fn rows_to_markdown(rows: &[ReportRow]) -> String {
    let mut s = String::from("| method | ω | τ | IT | CPU | RES |\n|---|---|---|---|---|---|\n");
    for r in rows {
        let (w, t) = r.display_params();
        let status = if r.converged() {
            String::new()
        } else {
            format!(" ({})", r.status)
        };
        let _ = writeln!(
            s,
            "| {}{} | {} | {} | {} | {:.4} | {:.4e} |",
            r.method, status, w, t, r.iterations, r.wall_seconds, r.final_residual
        );
    }
    s
}

/// Viscosities of the benchmark tables.
pub const TABLE_NUS: [f64; 3] = [1.0, 0.01, 0.0001];
pub const TABLE_L: usize = 25;

/// Printed stationary-solver results: method, ν, (ω, τ), IT, RES.
pub struct StationaryEntry {
    pub method: Method,
    pub nu: f64,
    pub params: Option<(f64, f64)>,
    pub iterations: usize,
    pub residual: f64,
}

const fn printed(method: Method, nu: f64, params: Option<(f64, f64)>, iterations: usize, residual: f64) -> StationaryEntry {
    StationaryEntry {
        method,
        nu,
        params,
        iterations,
        residual,
    }
}

const GI: Method = Method::Stationary(GstsCase::GstsI);
const GII: Method = Method::Stationary(GstsCase::GstsII);
const GIII: Method = Method::Stationary(GstsCase::GstsIII);
const SI: Method = Method::Stationary(GstsCase::GsorI);
const SII: Method = Method::Stationary(GstsCase::GsorII);
const GM: Method = Method::Gmres(None);

pub const STATIONARY_TABLE: [StationaryEntry; 18] = [
    printed(GI, 1.0, Some((0.98, 1.01)), 3, 8.3841e-7),
    printed(GII, 1.0, Some((0.99, 1.03)), 12, 9.7573e-7),
    printed(GIII, 1.0, Some((0.97, 1.02)), 13, 9.6413e-7),
    printed(SI, 1.0, Some((0.89, 2.07)), 14, 4.0305e-7),
    printed(SII, 1.0, Some((0.89, 2.11)), 14, 4.0232e-7),
    printed(GM, 1.0, None, 182, 9.9927e-7),
    printed(GI, 0.01, Some((0.99, 1.00)), 3, 6.6282e-7),
    printed(GII, 0.01, Some((0.01, 0.30)), 73, 9.7501e-7),
    printed(GIII, 0.01, Some((0.02, 0.34)), 63, 9.6153e-7),
    printed(SI, 0.01, Some((0.38, 0.24)), 68, 8.1165e-7),
    printed(SII, 0.01, Some((0.43, 0.28)), 58, 8.5245e-7),
    printed(GM, 0.01, None, 404, 9.7660e-7),
    printed(GI, 0.0001, Some((0.98, 1.00)), 3, 1.4299e-12),
    printed(GII, 0.0001, Some((0.01, 0.17)), 115, 9.5478e-7),
    printed(GIII, 0.0001, Some((0.01, 0.24)), 110, 9.4855e-7),
    printed(SI, 0.0001, Some((0.24, 0.14)), 164, 9.1062e-7),
    printed(SII, 0.0001, Some((0.32, 0.20)), 118, 9.8351e-7),
    printed(GM, 0.0001, None, 637, 9.7598e-7),
];

/// Printed preconditioned-GMRES iteration counts for ν = 1, 0.01, 0.0001.
pub const PRECONDITIONED_TABLE: [(Precond, [usize; 3]); 8] = [
    (Precond::Gsts(GstsCase::GstsI), [14, 11, 3]),
    (Precond::Gsts(GstsCase::GstsII), [17, 18, 4]),
    (Precond::Gsts(GstsCase::GstsIII), [17, 16, 3]),
    (Precond::Gsts(GstsCase::GsorI), [26, 27, 8]),
    (Precond::Gsts(GstsCase::GsorII), [26, 22, 6]),
    (Precond::Constraint(PChoice::Diagonal), [34, 29, 41]),
    (Precond::Constraint(PChoice::Tridiagonal), [34, 28, 41]),
    (Precond::Hss, [21, 22, 19]),
];

/// Spec for one printed stationary row. GSOR rows use the closed-form
/// optimum (the printed two-digit values are its rounding); GSTS rows use
/// the printed parameters.
pub fn stationary_spec(entry: &StationaryEntry) -> ExperimentSpec {
    let params = match (entry.method, entry.params) {
        (Method::Stationary(c), Some((w, t))) if !c.is_gsor() => MethodParams {
            omega: Some(w),
            tau: Some(t),
            ..Default::default()
        },
        _ => MethodParams::default(),
    };
    ExperimentSpec {
        problem: ProblemSource::Stokes {
            l: TABLE_L,
            nu: entry.nu,
        },
        method: entry.method,
        params,
        solver: SolverConfig::default(),
    }
}

/// Spec for one preconditioned GMRES(10) cell; GSTS-family preconditioners
/// reuse the stationary parameters for the same ν.
pub fn preconditioned_spec(precond: Precond, nu: f64) -> ExperimentSpec {
    let params = match precond {
        Precond::Gsts(case) => STATIONARY_TABLE
            .iter()
            .find(|e| e.nu == nu && e.method == Method::Stationary(case))
            .map(|e| stationary_spec(e).params)
            .unwrap_or_default(),
        _ => MethodParams::default(),
    };
    ExperimentSpec {
        problem: ProblemSource::Stokes { l: TABLE_L, nu },
        method: Method::Gmres(Some(precond)),
        params,
        solver: SolverConfig::default().with_restart(PRECONDITIONED_RESTART),
    }
}

#[derive(Debug, Clone)]
pub struct ComparedRow {
    pub label: String,
    pub nu: f64,
    pub printed_iterations: usize,
    pub printed_residual: Option<f64>,
    pub row: ReportRow,
}

impl ComparedRow {
    pub fn relative_deviation(&self) -> f64 {
        (self.row.iterations as f64 - self.printed_iterations as f64) / self.printed_iterations as f64
    }
}

#[derive(Debug, Clone)]
pub struct Reproduction {
    pub stationary: Vec<ComparedRow>,
    pub preconditioned: Vec<ComparedRow>,
}

impl Reproduction {
    pub fn all_converged(&self) -> bool {
        self.stationary.iter().chain(&self.preconditioned).all(|c| c.row.converged())
    }
}

fn systems() -> Result<Vec<SaddleSystem>> {
    TABLE_NUS
        .iter()
        .map(|&nu| mac_stokes_benchmark(&StokesConfig::new(TABLE_L, nu)?))
        .collect()
}

fn nu_index(nu: f64) -> usize {
    TABLE_NUS.iter().position(|&v| v == nu).expect("table viscosity")
}

/// Runs the 18 stationary rows and 24 preconditioned cells in table order.
pub fn reproduce_tables() -> Result<Reproduction> {
    let sys = systems()?;
    let stationary = STATIONARY_TABLE
        .par_iter()
        .map(|e| {
            let row = run_on(&sys[nu_index(e.nu)], &stationary_spec(e))?;
            Ok(ComparedRow {
                label: e.method.label(),
                nu: e.nu,
                printed_iterations: e.iterations,
                printed_residual: Some(e.residual),
                row,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(Precond, usize, usize)> = PRECONDITIONED_TABLE
        .iter()
        .flat_map(|&(p, its)| (0..3).map(move |k| (p, k, its[k])))
        .collect();
    let preconditioned = cells
        .par_iter()
        .map(|&(p, k, it)| {
            let nu = TABLE_NUS[k];
            let row = run_on(&sys[k], &preconditioned_spec(p, nu))?;
            Ok(ComparedRow {
                label: p.label().to_string(),
                nu,
                printed_iterations: it,
                printed_residual: None,
                row,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Reproduction { stationary, preconditioned })
}

/// Markdown diff of measured against printed iteration counts.
pub fn render_diff(rep: &Reproduction) -> String {
    let mut s = String::new();
    let section = |s: &mut String, title: &str, rows: &[ComparedRow]| {
        let _ = writeln!(s, "## {title}\n");
        let _ = writeln!(
            s,
            "| ν | method | ω | τ | IT (printed) | IT | ΔIT | RES (printed) | RES | status |"
        );
        let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|---|");
        for c in rows {
            let (w, t) = c.row.display_params();
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {:+.1}% | {} | {:.4e} | {} |",
                c.nu,
                c.label,
                w,
                t,
                c.printed_iterations,
                c.row.iterations,
                100.0 * c.relative_deviation(),
                c.printed_residual.map_or("-".into(), |r| format!("{r:.4e}")),
                c.row.final_residual,
                c.row.status
            );
        }
        let _ = writeln!(s);
    };
    section(&mut s, "Stationary solvers and GMRES", &rep.stationary);
    section(
        &mut s,
        &format!("Preconditioned GMRES({PRECONDITIONED_RESTART})"),
        &rep.preconditioned,
    );
    s
}

/// Writes `stationary.{csv,md}`, `preconditioned.{csv,md}` and `diff.md` into `out_dir`.
pub fn write_reproduction(rep: &Reproduction, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let t2: Vec<ReportRow> = rep.stationary.iter().map(|c| c.row.clone()).collect();
    let t3: Vec<ReportRow> = rep.preconditioned.iter().map(|c| c.row.clone()).collect();
    let files = [
        ("stationary.csv", rows_to_csv(&t2)?),
        ("stationary.md", rows_to_markdown(&t2)),
        ("preconditioned.csv", rows_to_csv(&t3)?),
        ("preconditioned.md", rows_to_markdown(&t3)),
        ("diff.md", render_diff(rep)),
    ];
    let mut out = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for tag in [
            "gsts-i", "gsts-ii", "gsts-iii", "gsor-i", "gsor-ii", "gmres", "gmres+gsts-ii",
            "gmres+cp-i", "gmres+cp-ii", "gmres+hss", "qmr",
        ] {
            assert_eq!(Method::from_tag(tag).unwrap().tag(), tag);
        }
        assert_eq!(
            Method::from_tag("hss").unwrap(),
            Method::Gmres(Some(Precond::Hss))
        );
        assert!(Method::from_tag("sor").is_err());
        assert!(Method::from_tag("gmres+gmres").is_err());
    }

    #[test]
    fn qmr_is_reserved() {
        let spec = ExperimentSpec {
            problem: ProblemSource::Stokes { l: 2, nu: 1.0 },
            method: Method::Qmr,
            params: MethodParams::default(),
            solver: SolverConfig::default(),
        };
        assert!(matches!(cmd_run(&spec), Err(Error::Unsupported(_))));
    }

    #[test]
    fn gsts_needs_both_columns() {
        let spec = ExperimentSpec {
            problem: ProblemSource::Stokes { l: 3, nu: 1.0 },
            method: Method::Stationary(GstsCase::GstsII),
            params: MethodParams {
                omega: Some(0.5),
                ..Default::default()
            },
            solver: SolverConfig::default(),
        };
        assert!(matches!(cmd_run(&spec), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let spec = ExperimentSpec {
            problem: ProblemSource::Stokes { l: 4, nu: 0.01 },
            method: Method::Stationary(GstsCase::GsorI),
            params: MethodParams::default(),
            solver: SolverConfig::default(),
        };
        let mut rows = vec![cmd_run(&spec).unwrap()];
        rows.push(ReportRow {
            method: "gmres+hss".into(),
            l: None,
            nu: None,
            omega1: None,
            omega2: None,
            tau: None,
            nu_g: None,
            alpha: Some(0.1 + 0.2),
            restart: Some(10),
            iterations: 0,
            wall_seconds: 1e-300,
            final_residual: 0.0,
            status: "max-iterations".into(),
        });
        let text = rows_to_csv(&rows).unwrap();
        assert_eq!(rows_from_csv(&text).unwrap(), rows);
    }

    #[test]
    fn markdown_header_order() {
        let md = rows_to_markdown(&[]);
        assert!(md.starts_with("| method | ω | τ | IT | CPU | RES |"));
    }

    #[test]
    fn preconditioned_gsts_params_come_from_stationary() {
        let spec = preconditioned_spec(Precond::Gsts(GstsCase::GstsII), 0.01);
        assert_eq!(spec.params.omega, Some(0.01));
        assert_eq!(spec.params.tau, Some(0.30));
        assert_eq!(spec.solver.restart, Some(PRECONDITIONED_RESTART));
        let spec = preconditioned_spec(Precond::Gsts(GstsCase::GsorI), 0.01);
        assert_eq!(spec.params, MethodParams::default());
    }

    #[test]
    fn analyze_rejects_large_grid() {
        let r = cmd_analyze(
            &ProblemSource::Stokes { l: 13, nu: 1.0 },
            GstsCase::GstsI,
            &MethodParams {
                omega: Some(1.0),
                tau: Some(1.0),
                ..Default::default()
            },
        );
        assert!(r.is_err());
    }
}
