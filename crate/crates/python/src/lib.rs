//! Python bindings: `import gsts`.

use std::path::PathBuf;

use gsts_core::analysis::{self, tau_interval as core_tau_interval};
use gsts_core::cli::{run_on, ExperimentSpec, Method, MethodParams, ProblemSource, ReportRow};
use gsts_core::problem::{load_system, mac_stokes_benchmark, random_rank_deficient, StokesConfig};
use gsts_core::solvers::{run_case, GstsCase, IterationReport, SolverConfig, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use gsts_core::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn case_of(tag: &str) -> PyResult<GstsCase> {
    GstsCase::from_tag(&tag.to_ascii_lowercase())
        .ok_or_else(|| PyValueError::new_err(format!("unknown stationary case '{tag}'")))
}

/// Singular saddle-point system `[[M, E], [-E^T, 0]] u = f`.
#[pyclass(name = "SaddleSystem", frozen)]
struct PySaddleSystem {
    inner: gsts_core::problem::SaddleSystem,
    source: ProblemSource,
}

#[pymethods]
impl PySaddleSystem {
    /// MAC Stokes benchmark on an l x l grid.
    #[staticmethod]
    #[pyo3(signature = (l, nu = 1.0))]
    fn stokes(l: usize, nu: f64) -> PyResult<Self> {
        let cfg = StokesConfig::new(l, nu).map_err(to_py)?;
        Ok(Self {
            inner: mac_stokes_benchmark(&cfg).map_err(to_py)?,
            source: ProblemSource::Stokes { l, nu },
        })
    }

    /// Random system with SPD M and rank-deficient E.
    #[staticmethod]
    #[pyo3(signature = (p, q, rank, seed = 0))]
    fn random(p: usize, q: usize, rank: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: random_rank_deficient(p, q, rank, seed).map_err(to_py)?,
            source: ProblemSource::InMemory,
        })
    }

    /// Directory written by `gsts generate`.
    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        let (inner, _) = load_system(&dir).map_err(to_py)?;
        inner.validate().map_err(to_py)?;
        Ok(Self {
            inner,
            source: ProblemSource::Files(dir),
        })
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rhs(&self) -> Vec<f64> {
        self.inner.rhs()
    }

    /// `A u`.
    fn apply(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        if u.len() != self.inner.n() {
            return Err(PyValueError::new_err(format!("expected length {}, got {}", self.inner.n(), u.len())));
        }
        Ok(gsts_core::linalg::LinearOperator::apply(&self.inner, &u))
    }

    fn __repr__(&self) -> String {
        format!("SaddleSystem(p={}, q={})", self.inner.p(), self.inner.q())
    }
}

/// Outcome of one stationary solve.
#[pyclass(name = "IterationReport", frozen, get_all)]
struct PyIterationReport {
    iterations: usize,
    converged: bool,
    status: String,
    final_residual: f64,
    residual_history: Vec<f64>,
    wall_seconds: f64,
    solution: Vec<f64>,
}

impl From<IterationReport> for PyIterationReport {
    fn from(r: IterationReport) -> Self {
        Self {
            iterations: r.iterations,
            converged: r.converged,
            status: r.status.as_str().to_string(),
            final_residual: r.final_residual(),
            residual_history: r.residual_history,
            wall_seconds: r.wall_seconds,
            solution: r.solution,
        }
    }
}

#[pymethods]
impl PyIterationReport {
    fn __repr__(&self) -> String {
        format!(
            "IterationReport(iterations={}, status='{}', final_residual={:e})",
            self.iterations, self.status, self.final_residual
        )
    }
}

fn config(tol: f64, maxit: usize, restart: Option<usize>) -> SolverConfig {
    SolverConfig {
        tolerance: tol,
        max_iterations: maxit,
        restart,
        initial_guess: None,
    }
}

/// Stationary GSTS / GSOR iteration for one tabulated case
/// (`gsts-i`, `gsts-ii`, `gsts-iii`, `gsor-i`, `gsor-ii`) and its two
/// parameter columns.
#[pyfunction]
#[pyo3(signature = (system, case, col1, col2, tol = DEFAULT_TOLERANCE, maxit = DEFAULT_MAX_ITERATIONS))]
fn solve(
    system: &PySaddleSystem,
    case: &str,
    col1: f64,
    col2: f64,
    tol: f64,
    maxit: usize,
) -> PyResult<PyIterationReport> {
    let report = run_case(&system.inner, case_of(case)?, col1, col2, &config(tol, maxit, None)).map_err(to_py)?;
    Ok(report.into())
}

fn row_dict<'py>(py: Python<'py>, row: &ReportRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("method", &row.method)?;
    d.set_item("l", row.l)?;
    d.set_item("nu", row.nu)?;
    d.set_item("omega1", row.omega1)?;
    d.set_item("omega2", row.omega2)?;
    d.set_item("tau", row.tau)?;
    d.set_item("nu_g", row.nu_g)?;
    d.set_item("alpha", row.alpha)?;
    d.set_item("restart", row.restart)?;
    d.set_item("iterations", row.iterations)?;
    d.set_item("wall_seconds", row.wall_seconds)?;
    d.set_item("final_residual", row.final_residual)?;
    d.set_item("status", &row.status)?;
    Ok(d)
}

/// Any CLI method tag (`gsts-ii`, `gmres`, `gmres+cp-i`, `gmres+hss`, ...);
/// returns the report row as a dict.
#[pyfunction]
#[pyo3(signature = (system, method, omega = None, tau = None, omega1 = None, alpha = None,
                    tol = DEFAULT_TOLERANCE, maxit = DEFAULT_MAX_ITERATIONS, restart = None))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    system: &PySaddleSystem,
    method: &str,
    omega: Option<f64>,
    tau: Option<f64>,
    omega1: Option<f64>,
    alpha: Option<f64>,
    tol: f64,
    maxit: usize,
    restart: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = ExperimentSpec {
        problem: system.source.clone(),
        method: Method::from_tag(method).map_err(to_py)?,
        params: MethodParams {
            omega,
            omega1,
            tau,
            alpha,
        },
        solver: config(tol, maxit, restart),
    };
    let row = run_on(&system.inner, &spec).map_err(to_py)?;
    row_dict(py, &row)
}

/// Spectral analysis of the iteration matrix for a stationary case.
#[pyfunction]
fn analyze<'py>(
    py: Python<'py>,
    system: &PySaddleSystem,
    case: &str,
    col1: f64,
    col2: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (choice, params) = case_of(case)?.configure(col1, col2).map_err(to_py)?;
    let a = analysis::analyze(&system.inner, &choice, params).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("regime", a.regime.as_str())?;
    d.set_item("gamma", a.report.gamma)?;
    d.set_item("spectral_radius", a.report.spectral_radius)?;
    d.set_item("index_one", a.report.index_one)?;
    d.set_item("nullspace_ok", a.report.nullspace_ok)?;
    d.set_item("semiconvergent", a.report.semiconvergent())?;
    d.set_item("omega_tilde", a.bound.omega_tilde)?;
    d.set_item("alpha_range", a.ranges.alpha)?;
    d.set_item("beta_range", a.bound.beta_range)?;
    d.set_item("tau_upper", a.bound.upper)?;
    d.set_item("tau_upper_capped", a.bound.capped_upper())?;
    d.set_item("tau_upper_joint", a.joint.upper)?;
    d.set_item("sufficient", a.bound.sufficient)?;
    Ok(d)
}

/// Upper end of the sufficient τ interval, or None when it is empty.
#[pyfunction]
fn tau_interval(alpha: f64, beta: f64, omega1: f64, omega2: f64) -> PyResult<Option<f64>> {
    core_tau_interval(alpha, beta, omega1, omega2).map_err(to_py)
}

#[pymodule]
fn gsts(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySaddleSystem>()?;
    m.add_class::<PyIterationReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(tau_interval, m)?)?;
    Ok(())
}
