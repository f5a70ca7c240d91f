//! GSTS stationary iteration, left-preconditioned restarted GMRES and the
//! relative block residual used as stopping rule.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm, LinearOperator};
use crate::problem::SaddleSystem;
use crate::splitting::{build_b, BChoice, BuiltB, GstsParams, GstsPreconditioner, PChoice};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 5000;
/// RES above this aborts a run as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// GMRES restart length; `None` runs unrestarted.
    pub restart: Option<usize>,
    /// Zero vector when absent.
    pub initial_guess: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            restart: None,
            initial_guess: None,
        }
    }
}

impl SolverConfig {
    pub fn with_restart(mut self, restart: usize) -> Self {
        self.restart = Some(restart);
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if self.restart == Some(0) {
            return Err(Error::InvalidParameter("restart must be >= 1".into()));
        }
        Ok(())
    }

    fn start(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        match &self.initial_guess {
            Some(x0) => {
                check_len("initial guess", n, x0.len())?;
                Ok(x0.clone())
            }
            None => Ok(vec![0.0; n]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Diverged,
    /// Krylov space became invariant before the residual was small.
    Breakdown,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::Diverged => "diverged",
            SolveStatus::Breakdown => "breakdown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    pub iterations: usize,
    /// RES per iterate, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub status: SolveStatus,
    pub wall_seconds: f64,
    pub solution: Vec<f64>,
}

impl IterationReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }
}

/// `‖f − A u‖ / ‖f‖`, or the absolute norm when `f = 0`.
pub fn relative_residual(a: &dyn LinearOperator, f: &[f64], u: &[f64]) -> f64 {
    let mut r = a.apply(u);
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = fi - *ri;
    }
    scaled_norm(&r, norm(f))
}

fn scaled_norm(r: &[f64], fnorm: f64) -> f64 {
    let rn = norm(r);
    if fnorm > 0.0 {
        rn / fnorm
    } else {
        rn
    }
}

/// `sqrt((‖f₁ − Mu₁ − Eu₂‖² + ‖f₂ + Eᵀu₁‖²) / (‖f₁‖² + ‖f₂‖²))`; the
/// denominator is dropped when `f = 0`.
pub fn residual_eq40(sys: &SaddleSystem, u1: &[f64], u2: &[f64]) -> Result<f64> {
    check_len("residual u1", sys.p(), u1.len())?;
    check_len("residual u2", sys.q(), u2.len())?;
    let mut r1 = sys.m().mul_vec(u1);
    let eu2 = sys.e().mul_vec(u2);
    for ((r, f), e) in r1.iter_mut().zip(sys.f1()).zip(&eu2) {
        *r = f - *r - e;
    }
    let mut r2 = sys.e().mul_transpose_vec(u1);
    for (r, f) in r2.iter_mut().zip(sys.f2()) {
        *r += f;
    }
    let num = dot(&r1, &r1) + dot(&r2, &r2);
    let den = dot(sys.f1(), sys.f1()) + dot(sys.f2(), sys.f2());
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

fn classify(res: f64, tol: f64) -> Option<SolveStatus> {
    if res < tol {
        Some(SolveStatus::Converged)
    } else if !res.is_finite() || res > DIVERGENCE_THRESHOLD {
        Some(SolveStatus::Diverged)
    } else {
        None
    }
}

/// GSTS iteration with a prepared preconditioner (which fixes B and the
/// parameters):
///
/// ```text
/// u₂ ← u₂ + τ B∘[ω₁EᵀM⁻¹(f₁ − Eu₂) + (1 − ω₁)Eᵀu₁ + f₂]
/// u₁ ← (1 − τ)u₁ + M⁻¹[E((ω₂ − τ)u₂_old − ω₂u₂_new) + τf₁]
/// ```
pub fn gsts_iterate(
    sys: &SaddleSystem,
    pre: &GstsPreconditioner,
    cfg: &SolverConfig,
) -> Result<IterationReport> {
    let params = pre.params();
    params.validate()?;
    check_len("preconditioner size", sys.n(), LinearOperator::dim(pre))?;
    let x0 = cfg.start(sys.n())?;
    let clock = Instant::now();
    let p = sys.p();
    let GstsParams { omega1, omega2, tau } = params;
    let mut u1 = x0[..p].to_vec();
    let mut u2 = x0[p..].to_vec();

    let mut history = vec![residual_eq40(sys, &u1, &u2)?];
    let mut status = classify(history[0], cfg.tolerance);
    let mut it = 0;
    let mut t1 = vec![0.0; p];
    while status.is_none() && it < cfg.max_iterations {
        let eu2 = sys.e().mul_vec(&u2);
        for ((t, f), e) in t1.iter_mut().zip(sys.f1()).zip(&eu2) {
            *t = f - e;
        }
        let s = pre.m_solve(&t1);
        let mut rhs = sys.e().mul_transpose_vec(&s);
        let etu1 = sys.e().mul_transpose_vec(&u1);
        for ((r, a), f) in rhs.iter_mut().zip(&etu1).zip(sys.f2()) {
            *r = omega1 * *r + (1.0 - omega1) * a + f;
        }
        let step = pre.b().apply_inverse(&rhs);
        let u2_old = std::mem::take(&mut u2);
        u2 = u2_old.iter().zip(&step).map(|(u, d)| u + tau * d).collect();

        let mix: Vec<f64> = u2_old
            .iter()
            .zip(&u2)
            .map(|(o, n)| (omega2 - tau) * o - omega2 * n)
            .collect();
        let mut t = sys.e().mul_vec(&mix);
        for (ti, f) in t.iter_mut().zip(sys.f1()) {
            *ti += tau * f;
        }
        let corr = pre.m_solve(&t);
        for (u, c) in u1.iter_mut().zip(&corr) {
            *u = (1.0 - tau) * *u + c;
        }

        it += 1;
        let res = residual_eq40(sys, &u1, &u2)?;
        history.push(res);
        status = classify(res, cfg.tolerance);
    }
    let status = status.unwrap_or(SolveStatus::MaxIterations);
    u1.extend_from_slice(&u2);
    Ok(IterationReport {
        iterations: it,
        residual_history: history,
        converged: status == SolveStatus::Converged,
        status,
        wall_seconds: clock.elapsed().as_secs_f64(),
        solution: u1,
    })
}

/// Builds the preconditioner for `(b, params)` and runs [`gsts_iterate`].
pub fn gsts_solve(
    sys: &SaddleSystem,
    b: &BuiltB,
    params: GstsParams,
    cfg: &SolverConfig,
) -> Result<IterationReport> {
    let pre = GstsPreconditioner::new(sys, b.clone(), params)?;
    gsts_iterate(sys, &pre, cfg)
}

struct Givens {
    c: f64,
    s: f64,
}

impl Givens {
    fn new(a: f64, b: f64) -> Self {
        let r = a.hypot(b);
        if r == 0.0 {
            Givens { c: 1.0, s: 0.0 }
        } else {
            Givens { c: a / r, s: b / r }
        }
    }

    fn apply(&self, x: &mut f64, y: &mut f64) {
        let (a, b) = (*x, *y);
        *x = self.c * a + self.s * b;
        *y = -self.s * a + self.c * b;
    }
}

/// Back substitution on the leading `k × k` block of the rotated Hessenberg
/// matrix (stored by columns).
fn upper_solve(h: &[Vec<f64>], g: &[f64], k: usize) -> Vec<f64> {
    let mut y = g[..k].to_vec();
    for i in (0..k).rev() {
        for j in i + 1..k {
            y[i] -= h[j][i] * y[j];
        }
        y[i] /= h[i][i];
    }
    y
}

/// GMRES with modified Gram–Schmidt Arnoldi and optional left
/// preconditioning. Convergence is judged on the true residual
/// `‖f − Ax‖ / ‖f‖` of every iterate; `iterations` counts Arnoldi steps
/// summed over restarts.
pub fn gmres_solve(
    a: &dyn LinearOperator,
    f: &[f64],
    precond: Option<&dyn LinearOperator>,
    cfg: &SolverConfig,
) -> Result<IterationReport> {
    let n = a.dim();
    check_len("gmres rhs", n, f.len())?;
    if let Some(pc) = precond {
        check_len("gmres preconditioner", n, pc.dim())?;
    }
    let mut x = cfg.start(n)?;
    let clock = Instant::now();
    let fnorm = norm(f);
    let restart = cfg.restart.unwrap_or(cfg.max_iterations.max(1));
    let precondition = |v: Vec<f64>| match precond {
        Some(pc) => pc.apply(&v),
        None => v,
    };

    let mut r = a.apply(&x);
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = fi - *ri;
    }
    let mut history = vec![scaled_norm(&r, fnorm)];
    let mut status = classify(history[0], cfg.tolerance);
    let mut total = 0;

    'outer: while status.is_none() && total < cfg.max_iterations {
        let z = precondition(r.clone());
        let beta = norm(&z);
        if beta == 0.0 {
            status = Some(SolveStatus::Breakdown);
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![z.iter().map(|v| v / beta).collect()];
        let mut a_basis: Vec<Vec<f64>> = Vec::new();
        let mut hess: Vec<Vec<f64>> = Vec::new();
        let mut rots: Vec<Givens> = Vec::new();
        let mut g = vec![beta];

        for j in 0..restart {
            let av = a.apply(&basis[j]);
            let mut w = precondition(av.clone());
            a_basis.push(av);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wnorm = norm(&w);
            col[j + 1] = wnorm;
            for (i, rot) in rots.iter().enumerate() {
                let (lo, hi) = col.split_at_mut(i + 1);
                rot.apply(&mut lo[i], &mut hi[0]);
            }
            let rot = Givens::new(col[j], col[j + 1]);
            {
                let (lo, hi) = col.split_at_mut(j + 1);
                rot.apply(&mut lo[j], &mut hi[0]);
            }
            g.push(0.0);
            {
                let (lo, hi) = g.split_at_mut(j + 1);
                rot.apply(&mut lo[j], &mut hi[0]);
            }
            rots.push(rot);
            hess.push(col);
            total += 1;

            let y = upper_solve(&hess, &g, j + 1);
            let mut rk = r.clone();
            for (yi, av) in y.iter().zip(&a_basis) {
                for (rr, a) in rk.iter_mut().zip(av) {
                    *rr -= yi * a;
                }
            }
            let res = scaled_norm(&rk, fnorm);
            history.push(res);
            status = classify(res, cfg.tolerance);
            let invariant = wnorm <= 1e-14 * beta;
            if status.is_some() || invariant || total >= cfg.max_iterations || j + 1 == restart {
                for (yi, v) in y.iter().zip(&basis) {
                    for (xx, vv) in x.iter_mut().zip(v) {
                        *xx += yi * vv;
                    }
                }
                r = rk;
                if status.is_none() && invariant {
                    status = Some(SolveStatus::Breakdown);
                }
                if status.is_some() {
                    break 'outer;
                }
                break;
            }
            basis.push(w.iter().map(|v| v / wnorm).collect());
        }
    }
    let status = status.unwrap_or(SolveStatus::MaxIterations);
    Ok(IterationReport {
        iterations: total,
        residual_history: history,
        converged: status == SolveStatus::Converged,
        status,
        wall_seconds: clock.elapsed().as_secs_f64(),
        solution: x,
    })
}

/// The five stationary configurations: a B-choice together with the mapping
/// from the two tabulated parameter columns to `(ω₁, ω₂, τ)`.
///
/// GSTS cases read `(col1, col2) = (ω₂, τ)` with `ω₁ = τ`; GSOR cases read
/// `(col1, col2) = (ω, ν_g)` with `ω₁ = τ = ω`, `ω₂ = 0` and
/// `B = (τ/ν_g)(I + EᵀP⁻¹E)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GstsCase {
    GstsI,
    GstsII,
    GstsIII,
    GsorI,
    GsorII,
}

impl GstsCase {
    pub const ALL: [GstsCase; 5] = [
        GstsCase::GstsI,
        GstsCase::GstsII,
        GstsCase::GstsIII,
        GstsCase::GsorI,
        GstsCase::GsorII,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            GstsCase::GstsI => "gsts-i",
            GstsCase::GstsII => "gsts-ii",
            GstsCase::GstsIII => "gsts-iii",
            GstsCase::GsorI => "gsor-i",
            GstsCase::GsorII => "gsor-ii",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GstsCase::GstsI => "GSTS I",
            GstsCase::GstsII => "GSTS II",
            GstsCase::GstsIII => "GSTS III",
            GstsCase::GsorI => "GSOR I",
            GstsCase::GsorII => "GSOR II",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == tag)
    }

    pub fn is_gsor(self) -> bool {
        matches!(self, GstsCase::GsorI | GstsCase::GsorII)
    }

    /// `(ω₁, ω₂, τ)` and the B-choice for one pair of column values.
    pub fn configure(self, col1: f64, col2: f64) -> Result<(BChoice, GstsParams)> {
        Ok(match self {
            GstsCase::GstsI => (BChoice::SchurExact, GstsParams::tied(col1, col2)?),
            GstsCase::GstsII => (BChoice::ShiftedDiag, GstsParams::tied(col1, col2)?),
            GstsCase::GstsIII => (BChoice::ShiftedTridiag, GstsParams::tied(col1, col2)?),
            GstsCase::GsorI => (
                BChoice::GsorDiag { nu_g: col2 },
                GstsParams::new(col1, 0.0, col1)?,
            ),
            GstsCase::GsorII => (
                BChoice::GsorTridiag { nu_g: col2 },
                GstsParams::new(col1, 0.0, col1)?,
            ),
        })
    }

    /// B with unit scale; GSOR points rescale it by `τ/ν_g`.
    fn base_choice(self) -> BChoice {
        match self {
            GstsCase::GstsI => BChoice::SchurExact,
            GstsCase::GstsII => BChoice::ShiftedDiag,
            GstsCase::GstsIII => BChoice::ShiftedTridiag,
            GstsCase::GsorI => BChoice::ShiftedDiag,
            GstsCase::GsorII => BChoice::ShiftedTridiag,
        }
    }

    pub fn p_choice(self) -> Option<PChoice> {
        self.base_choice().p_choice()
    }
}

fn rescaled(b: &BuiltB, new_scale: f64) -> BuiltB {
    match b {
        BuiltB::Nonsingular { matrix, factor, .. } => BuiltB::Nonsingular {
            matrix: matrix.clone(),
            factor: factor.clone(),
            scale: new_scale,
        },
        other => other.clone(),
    }
}

/// Runs one tabulated configuration.
pub fn run_case(
    sys: &SaddleSystem,
    case: GstsCase,
    col1: f64,
    col2: f64,
    cfg: &SolverConfig,
) -> Result<IterationReport> {
    let (choice, params) = case.configure(col1, col2)?;
    let b = build_b(sys, &choice, params.tau)?;
    gsts_solve(sys, &b, params, cfg)
}

/// Two-axis grid over the tabulated parameter columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub col1: Vec<f64>,
    pub col2: Vec<f64>,
}

impl SweepGrid {
    pub fn new(col1: Vec<f64>, col2: Vec<f64>) -> Self {
        Self { col1, col2 }
    }

    /// `count` evenly spaced values over `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        match count {
            0 => vec![],
            1 => vec![lo],
            _ => (0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.col1
            .iter()
            .flat_map(|&a| self.col2.iter().map(move |&b| (a, b)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.col1.len() * self.col2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub col1: f64,
    pub col2: f64,
    pub params: GstsParams,
    pub iterations: usize,
    pub final_residual: f64,
    pub status: SolveStatus,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub best: SweepPoint,
    /// One entry per grid point, in grid order.
    pub table: Vec<SweepPoint>,
}

/// Runs every grid point (in parallel) and returns the converged point with
/// the fewest iterations; ties go to the smaller final RES, then smaller τ.
pub fn parameter_sweep(
    sys: &SaddleSystem,
    case: GstsCase,
    grid: &SweepGrid,
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    sweep_points(sys, case, &grid.points(), cfg)
}

/// [`parameter_sweep`] over an explicit list of `(col1, col2)` points.
pub fn sweep_points(
    sys: &SaddleSystem,
    case: GstsCase,
    points: &[(f64, f64)],
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let base = build_b(sys, &case.base_choice(), 1.0)?;
    let table: Vec<SweepPoint> = points
        .par_iter()
        .copied()
        .map(|(c1, c2)| -> Result<SweepPoint> {
            let (choice, params) = case.configure(c1, c2)?;
            let b = match choice {
                BChoice::GsorDiag { nu_g } | BChoice::GsorTridiag { nu_g } => {
                    rescaled(&base, params.tau / nu_g)
                }
                _ => base.clone(),
            };
            let report = gsts_solve(sys, &b, params, cfg)?;
            Ok(SweepPoint {
                col1: c1,
                col2: c2,
                params,
                iterations: report.iterations,
                final_residual: report.final_residual(),
                status: report.status,
            })
        })
        .collect::<Result<_>>()?;
    let best = best_point(&table).cloned().ok_or_else(|| {
        let listed: Vec<String> = table
            .iter()
            .map(|p| format!("({}, {}): {}", p.col1, p.col2, p.status.as_str()))
            .collect();
        Error::SweepFailed(listed.join(", "))
    })?;
    Ok(SweepResult { best, table })
}

pub fn best_point(table: &[SweepPoint]) -> Option<&SweepPoint> {
    table
        .iter()
        .filter(|p| p.status == SolveStatus::Converged)
        .min_by(|a, b| {
            a.iterations
                .cmp(&b.iterations)
                .then(a.final_residual.total_cmp(&b.final_residual))
                .then(a.params.tau.total_cmp(&b.params.tau))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;
    use crate::problem::{mac_stokes_benchmark, StokesConfig};

    fn stokes(l: usize, nu: f64) -> SaddleSystem {
        mac_stokes_benchmark(&StokesConfig::new(l, nu).unwrap()).unwrap()
    }

    #[test]
    fn residual_at_exact_and_zero() {
        let sys = stokes(3, 1.0);
        let u = crate::problem::counting_solution(sys.n());
        let (u1, u2) = u.split_at(sys.p());
        assert!(residual_eq40(&sys, u1, u2).unwrap() < 1e-15);
        let z1 = vec![0.0; sys.p()];
        let z2 = vec![0.0; sys.q()];
        assert!((residual_eq40(&sys, &z1, &z2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn start_at_solution_takes_no_steps() {
        let sys = stokes(3, 1.0);
        let cfg = SolverConfig {
            initial_guess: Some(crate::problem::counting_solution(sys.n())),
            ..SolverConfig::default()
        };
        let r = run_case(&sys, GstsCase::GstsII, 0.9, 1.0, &cfg).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
        assert_eq!(r.residual_history.len(), 1);
    }

    #[test]
    fn gmres_identity_one_step() {
        let a = SparseMatrix::identity(6);
        let f = vec![1.0, -2.0, 3.0, 0.5, 0.0, 7.0];
        let r = gmres_solve(&a, &f, None, &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn gmres_diagonal_finite_termination() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let f = vec![1.0; 5];
        let cfg = SolverConfig::default().with_tolerance(1e-12);
        let r = gmres_solve(&a, &f, None, &cfg).unwrap();
        assert!(r.iterations <= 5);
        assert!(r.converged);
        for (i, x) in r.solution.iter().enumerate() {
            assert!((x - 1.0 / (i + 1) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn gmres_zero_rhs() {
        let a = SparseMatrix::identity(3);
        let r = gmres_solve(&a, &[0.0; 3], None, &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.final_residual(), 0.0);
    }

    #[test]
    fn gmres_restart_counts_all_inner_steps() {
        let sys = stokes(4, 1.0);
        let f = sys.rhs();
        let cfg = SolverConfig::default().with_restart(5);
        let r = gmres_solve(&sys, &f, None, &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.residual_history.len(), r.iterations + 1);
        assert!(relative_residual(&sys, &f, &r.solution) < 1e-6);
    }

    #[test]
    fn sweep_single_point() {
        let sys = stokes(3, 1.0);
        let grid = SweepGrid::new(vec![0.9], vec![1.0]);
        let res = parameter_sweep(&sys, GstsCase::GstsII, &grid, &SolverConfig::default()).unwrap();
        assert_eq!(res.table.len(), 1);
        assert_eq!(res.best.col1, 0.9);
        assert!(parameter_sweep(
            &sys,
            GstsCase::GstsII,
            &SweepGrid::new(vec![], vec![1.0]),
            &SolverConfig::default()
        )
        .is_err());
    }

    #[test]
    fn sweep_reports_all_diverged() {
        let sys = stokes(3, 1.0);
        let grid = SweepGrid::new(vec![0.5], vec![40.0]);
        let cfg = SolverConfig::default().with_max_iterations(200);
        assert!(matches!(
            parameter_sweep(&sys, GstsCase::GstsII, &grid, &cfg),
            Err(Error::SweepFailed(_))
        ));
    }

    #[test]
    fn gsts_limit_solves_system() {
        let sys = stokes(4, 0.1);
        let r = run_case(&sys, GstsCase::GstsI, 0.98, 1.0, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        let a = sys.block_matrix_dense();
        let ax = &a * crate::linalg::dvec(&r.solution);
        let f = sys.rhs();
        let err: f64 = ax.iter().zip(&f).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(err / norm(&f) <= 1e-6);
    }
}
