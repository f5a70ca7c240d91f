//! Dense spectral analysis of the GSTS iteration matrix: pseudo-spectral
//! radius, index-1 test, null-space condition, Rayleigh-quotient ranges and
//! the sufficient τ-intervals.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::linalg::{
    default_rank_tolerance, eigvals, max_principal_angle, null_space, pseudo_spectral_radius_of,
    spectral_radius_of, svd, symmetric_eigvals, DenseMatrix, SvdFactor, LinearOperator, SparseMatrix,
    DEFAULT_ONE_TOLERANCE,
};
use crate::problem::SaddleSystem;
use crate::splitting::{
    build_b, shifted_schur, schur_complement_dense, BChoice, BuiltB, GstsParams,
    GstsPreconditioner, PChoice,
};

/// Largest `p + q` for which the iteration matrix is materialized.
pub const ANALYSIS_CAP: usize = 500;
/// Largest principal angle (radians) at which two null spaces count as equal.
pub const PRINCIPAL_ANGLE_TOL: f64 = 1e-6;
/// Relative singular-value gap at the rank cut below which the index-1
/// verdict is flagged as fragile.
pub const RANK_GAP_WARNING: f64 = 1e-6;
/// Relative singular-value cutoff for the rank and null-space tests on
/// `I − G`; the default `n·ε·σ₁` sits inside the rounding noise of a
/// matrix assembled from n solves.
pub const ANALYSIS_RANK_RTOL: f64 = 1e-10;
/// Upper limit on τ from the eigenvalue `1 − τ` of the uncoupled u₁ block.
pub const UNIT_BLOCK_TAU_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// B nonsingular, `B(ω₁, ω₂)` applied through its inverse.
    Nonsingular,
    /// B singular with `null(B) = null(E)`, applied through the pseudoinverse.
    Singular,
}

impl Regime {
    pub fn of(b: &BuiltB) -> Self {
        if b.is_singular() {
            Regime::Singular
        } else {
            Regime::Nonsingular
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Nonsingular => "nonsingular",
            Regime::Singular => "singular",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// Pseudo-spectral radius: largest `|λ|` with `λ` not within
    /// [`DEFAULT_ONE_TOLERANCE`] of 1.
    pub gamma: f64,
    pub spectral_radius: f64,
    pub rank_i_minus_g: usize,
    pub rank_i_minus_g_sq: usize,
    pub index_one: bool,
    /// Singular regime only: `null(I − G) = null(A)`.
    pub nullspace_ok: Option<bool>,
    /// Largest principal angle behind `nullspace_ok`; `None` when the two
    /// spaces differ in dimension or the check does not apply.
    pub nullspace_angle: Option<f64>,
    /// Eigenvalues within [`DEFAULT_ONE_TOLERANCE`] of 1.
    pub unit_eigenvalues: usize,
    pub rank_gap_warning: bool,
    pub eigenvalues: Vec<Complex64>,
}

impl SpectralReport {
    /// `γ(G) < 1`, index 1 and, where it applies, the null-space condition.
    pub fn semiconvergent(&self) -> bool {
        self.gamma < 1.0 && self.index_one && self.nullspace_ok.unwrap_or(true)
    }
}

fn check_analysis_cap(n: usize) -> Result<()> {
    if n > ANALYSIS_CAP {
        return Err(Error::SizeCapExceeded {
            what: "iteration matrix",
            size: n,
            cap: ANALYSIS_CAP,
        });
    }
    Ok(())
}

/// `I − G = τ B(ω₁, ω₂)∘ A`, one preconditioner application per column of A.
/// Formed directly, it keeps its null space exact for small τ, where
/// `I − G` recovered from G loses it to cancellation.
pub fn iteration_defect_of(sys: &SaddleSystem, pre: &GstsPreconditioner) -> Result<DenseMatrix> {
    let n = sys.n();
    check_analysis_cap(n)?;
    check_len("preconditioner dimension", n, pre.dim())?;
    let tau = pre.params().tau;
    let a = sys.block_matrix_dense();
    let mut d = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let z = pre.apply(a.column(j).as_slice());
        for (i, zi) in z.iter().enumerate() {
            d[(i, j)] = tau * zi;
        }
    }
    Ok(d)
}

/// `G = I − τ B(ω₁, ω₂)∘ A`.
pub fn iteration_matrix_of(sys: &SaddleSystem, pre: &GstsPreconditioner) -> Result<DenseMatrix> {
    let d = iteration_defect_of(sys, pre)?;
    Ok(DenseMatrix::identity(d.nrows(), d.ncols()) - d)
}

pub fn iteration_matrix(
    sys: &SaddleSystem,
    choice: &BChoice,
    params: GstsParams,
) -> Result<DenseMatrix> {
    check_analysis_cap(sys.n())?;
    let pre = GstsPreconditioner::build(sys, choice, params)?;
    iteration_matrix_of(sys, &pre)
}

fn analysis_svd(a: &DenseMatrix) -> Result<SvdFactor> {
    let s = svd(a)?;
    let s1 = s.singular_values.first().copied().unwrap_or(0.0);
    Ok(s.with_rank_tolerance(ANALYSIS_RANK_RTOL * s1))
}

fn rank_with_gap(a: &DenseMatrix) -> Result<(usize, bool)> {
    let s = analysis_svd(a)?;
    let rank = s.rank();
    let sv = &s.singular_values;
    let fragile = match (sv.first(), rank) {
        (Some(&s1), r) if r > 0 && r < sv.len() && s1 > 0.0 => {
            (sv[r - 1] - sv[r]) / s1 < RANK_GAP_WARNING
        }
        _ => false,
    };
    Ok((rank, fragile))
}

/// Semi-convergence diagnostics for `G`. In the singular regime the null
/// space of `I − G = τ B(ω₁, ω₂)† A` is compared against `null(A)`.
pub fn check_semiconvergence(
    g: &DenseMatrix,
    regime: Regime,
    sys: &SaddleSystem,
) -> Result<SpectralReport> {
    let d = DenseMatrix::identity(g.nrows(), g.nrows()) - g;
    check_semiconvergence_with_defect(g, &d, regime, sys)
}

/// As [`check_semiconvergence`], with `I − G` supplied separately so the rank
/// and null-space tests see it free of cancellation.
pub fn check_semiconvergence_with_defect(
    g: &DenseMatrix,
    d: &DenseMatrix,
    regime: Regime,
    sys: &SaddleSystem,
) -> Result<SpectralReport> {
    let n = g.nrows();
    check_len("iteration matrix must be square", n, g.ncols())?;
    check_len("iteration matrix dimension", sys.n(), n)?;
    check_len("I - G dimension", n, d.nrows())?;
    let eigenvalues = eigvals(g)?;
    let gamma = pseudo_spectral_radius_of(&eigenvalues, DEFAULT_ONE_TOLERANCE);
    let spectral_radius = spectral_radius_of(&eigenvalues);
    let unit_eigenvalues = eigenvalues
        .iter()
        .filter(|z| (*z - 1.0).norm() <= DEFAULT_ONE_TOLERANCE)
        .count();
    let d2 = d * d;
    let (rank_i_minus_g, gap1) = rank_with_gap(d)?;
    let (rank_i_minus_g_sq, gap2) = rank_with_gap(&d2)?;
    let (nullspace_ok, nullspace_angle) = match regime {
        Regime::Nonsingular => (None, None),
        Regime::Singular => {
            let null_a = null_space(&sys.block_matrix_dense())?;
            let null_d = analysis_svd(d)?.null_space();
            let angle = max_principal_angle(&null_a, &null_d)?;
            (Some(angle.is_some_and(|t| t < PRINCIPAL_ANGLE_TOL)), angle)
        }
    };
    Ok(SpectralReport {
        gamma,
        spectral_radius,
        rank_i_minus_g,
        rank_i_minus_g_sq,
        index_one: rank_i_minus_g == rank_i_minus_g_sq,
        nullspace_ok,
        nullspace_angle,
        unit_eigenvalues,
        rank_gap_warning: gap1 || gap2,
        eigenvalues,
    })
}

/// SVD reduction `E = U Σ Vᵀ` of a saddle-point system to the nonsingular
/// block `[[M̂, E_r], [−E_rᵀ, 0]]`, `M̂ = UᵀMU`, `E_r = (Σ_r; 0)`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub m_hat: DenseMatrix,
    pub e_r: DenseMatrix,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub rank: usize,
}

impl ReducedSystem {
    /// First `r` columns of `V`, an orthonormal basis of `range(Eᵀ)`.
    pub fn v1(&self) -> DenseMatrix {
        self.v.columns(0, self.rank).into_owned()
    }

    pub fn to_saddle(&self) -> Result<SaddleSystem> {
        let (p, r) = self.e_r.shape();
        SaddleSystem::new(
            SparseMatrix::from_dense(&self.m_hat)?,
            SparseMatrix::from_dense(&self.e_r)?,
            vec![0.0; p],
            vec![0.0; r],
        )
    }
}

pub fn reduced_system(sys: &SaddleSystem) -> Result<ReducedSystem> {
    check_analysis_cap(sys.n())?;
    let s = svd(&sys.e().to_dense())?;
    let rank = s.rank();
    let p = sys.p();
    let mut e_r = DenseMatrix::zeros(p, rank);
    for i in 0..rank {
        e_r[(i, i)] = s.singular_values[i];
    }
    let m_hat = s.u.transpose() * sys.m().to_dense() * &s.u;
    let m_hat = (&m_hat + m_hat.transpose()) * 0.5;
    Ok(ReducedSystem {
        m_hat,
        e_r,
        u: s.u,
        v: s.v,
        rank,
    })
}

/// The reduced B block whose inverse is `V₁ᵀ B∘ V₁`.
fn reduced_b_inverse(red: &ReducedSystem, b: &BuiltB) -> Result<DenseMatrix> {
    let v1 = red.v1();
    let inner = v1.transpose() * b.inverse_dense()? * &v1;
    Ok((&inner + inner.transpose()) * 0.5)
}

/// `Ĝ₁ = I − τ B̂(ω₁, ω₂)⁻¹ Â` on the reduced system, where the reduced B
/// block is `(V₁ᵀ B∘ V₁)⁻¹`. Its spectrum together with `q − r` unit
/// eigenvalues is the spectrum of G.
pub fn reduced_iteration_matrix(
    sys: &SaddleSystem,
    choice: &BChoice,
    params: GstsParams,
) -> Result<DenseMatrix> {
    let red = reduced_system(sys)?;
    let b = build_b(sys, choice, params.tau)?;
    let inner = reduced_b_inverse(&red, &b)?;
    let b_hat = inner
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite {
            pivot: 0,
            value: 0.0,
        })?;
    let b_hat = (&b_hat + b_hat.transpose()) * 0.5;
    let rsys = red.to_saddle()?;
    iteration_matrix(&rsys, &BChoice::CustomHpd(SparseMatrix::from_dense(&b_hat)?), params)
}

fn extremes(vals: &[f64]) -> Result<(f64, f64)> {
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(Error::InvalidParameter(
            "E has rank 0; Rayleigh ranges are empty".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighRanges {
    pub regime: Regime,
    /// Eigenvalue range of `E_rᵀ M̂⁻¹ E_r`.
    pub alpha: (f64, f64),
    /// Eigenvalue range of `V₁ᵀ B V₁`.
    pub beta_block: (f64, f64),
    /// Eigenvalue range of `(V₁ᵀ B∘ V₁)⁻¹`, the block entering `Ĝ₁`.
    pub beta_schur: (f64, f64),
    /// Range of `β(z)/α(z)` over a common z, for both β matrices.
    pub ratio: (f64, f64),
}

impl RayleighRanges {
    /// Smallest interval holding both β ranges; used for the τ bound.
    pub fn beta_hull(&self) -> (f64, f64) {
        (
            self.beta_block.0.min(self.beta_schur.0),
            self.beta_block.1.max(self.beta_schur.1),
        )
    }
}

pub fn rayleigh_ranges(sys: &SaddleSystem, choice: &BChoice, tau: f64) -> Result<RayleighRanges> {
    let red = reduced_system(sys)?;
    let b = build_b(sys, choice, tau)?;
    rayleigh_ranges_of(&red, &b)
}

pub fn rayleigh_ranges_of(red: &ReducedSystem, b: &BuiltB) -> Result<RayleighRanges> {
    check_len("B dimension", red.v.nrows(), b.dim())?;
    let chol = red
        .m_hat
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            pivot: 0,
            value: red.m_hat[(0, 0)],
        })?;
    let a_mat = red.e_r.transpose() * chol.solve(&red.e_r);
    let a_mat = (&a_mat + a_mat.transpose()) * 0.5;
    let alpha = extremes(&symmetric_eigvals(&a_mat)?)?;
    let v1 = red.v1();
    let block = v1.transpose() * b.to_dense() * &v1;
    let beta_block = extremes(&symmetric_eigvals(&block)?)?;
    let inner = reduced_b_inverse(red, b)?;
    let (lo, hi) = extremes(&symmetric_eigvals(&inner)?)?;
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite { pivot: 0, value: lo });
    }
    let schur_block = inner.try_inverse().ok_or(Error::NotPositiveDefinite {
        pivot: 0,
        value: lo,
    })?;
    let a_chol = a_mat.cholesky().ok_or(Error::NotPositiveDefinite {
        pivot: 0,
        value: alpha.0,
    })?;
    let r1 = pencil_range(&a_chol, &block)?;
    let r2 = pencil_range(&a_chol, &schur_block)?;
    Ok(RayleighRanges {
        regime: Regime::of(b),
        alpha,
        beta_block,
        beta_schur: (1.0 / hi, 1.0 / lo),
        ratio: (r1.0.min(r2.0), r1.1.max(r2.1)),
    })
}

/// Extreme eigenvalues of `L⁻¹ B Lᵀ⁻¹` for `A = L Lᵀ`, i.e. the range of
/// `zᵀBz / zᵀAz`.
fn pencil_range(a: &nalgebra::Cholesky<f64, nalgebra::Dyn>, b: &DenseMatrix) -> Result<(f64, f64)> {
    let l = a.l();
    let half = l
        .solve_lower_triangular(b)
        .ok_or(Error::NoConvergence { routine: "triangular solve" })?;
    let full = l
        .solve_lower_triangular(&half.transpose())
        .ok_or(Error::NoConvergence { routine: "triangular solve" })?;
    extremes(&symmetric_eigvals(&full)?)
}

/// Upper end of the sufficient interval `(0, upper)` for τ, or `None` when
/// `ω̃ ≥ (α + β)/α` leaves no admissible τ.
pub fn tau_interval(alpha: f64, beta: f64, omega1: f64, omega2: f64) -> Result<Option<f64>> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha and beta must be positive and finite, got {alpha}, {beta}"
        )));
    }
    let wt = (omega1 - 1.0) * (omega2 - 1.0);
    if !wt.is_finite() {
        return Err(Error::InvalidParameter("omegas must be finite".into()));
    }
    if wt >= (alpha + beta) / alpha {
        return Ok(None);
    }
    let lead = beta + (1.0 - wt) * alpha;
    let gap = beta - (1.0 - wt) * alpha;
    let disc = gap * gap - 4.0 * wt * alpha * beta;
    let upper = if disc <= 0.0 {
        lead / alpha
    } else {
        (lead - disc.sqrt()) / alpha
    };
    Ok((upper > 0.0).then_some(upper))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterBound {
    pub omega_tilde: f64,
    pub alpha_range: (f64, f64),
    pub beta_range: (f64, f64),
    /// `τ ∈ (0, upper)` is sufficient; `None` for an empty interval.
    pub upper: Option<f64>,
    /// The supplied τ lies inside the interval.
    pub sufficient: bool,
}

impl ParameterBound {
    /// `min(upper, 2)`: directions `(x, 0)` with `Eᵀx = 0` are eigenvectors of
    /// G with eigenvalue `1 − τ`, so `τ < 2` is also necessary whenever
    /// `p > rank(E)`, which the Rayleigh-quotient interval does not enforce.
    pub fn capped_upper(&self) -> Option<f64> {
        self.upper.map(|u| u.min(UNIT_BLOCK_TAU_LIMIT))
    }
}

/// τ bound with α and β taken at the same z: since the interval depends on
/// `β/α` only, it is the intersection over the endpoints of the ratio range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointBound {
    pub ratio_range: (f64, f64),
    pub upper: Option<f64>,
    pub sufficient: bool,
}

pub fn joint_bound(ratio_range: (f64, f64), params: GstsParams) -> Result<JointBound> {
    let lo = tau_interval(1.0, ratio_range.0, params.omega1, params.omega2)?;
    let hi = tau_interval(1.0, ratio_range.1, params.omega1, params.omega2)?;
    let upper = match (lo, hi) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };
    Ok(JointBound {
        ratio_range,
        upper,
        sufficient: upper.is_some_and(|u| params.tau < u),
    })
}

/// Intersects the τ-intervals of the four corner pairings of
/// `alpha_range × beta_range`.
pub fn parameter_bound(
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    params: GstsParams,
) -> Result<ParameterBound> {
    let mut upper = Some(f64::INFINITY);
    for a in [alpha_range.0, alpha_range.1] {
        for b in [beta_range.0, beta_range.1] {
            let corner = tau_interval(a, b, params.omega1, params.omega2)?;
            upper = match (upper, corner) {
                (Some(u), Some(c)) => Some(u.min(c)),
                _ => None,
            };
        }
    }
    Ok(ParameterBound {
        omega_tilde: params.omega_tilde(),
        alpha_range,
        beta_range,
        upper,
        sufficient: upper.is_some_and(|u| params.tau < u),
    })
}

/// Everything the `analyze` command reports for one configuration.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub regime: Regime,
    pub params: GstsParams,
    pub report: SpectralReport,
    pub ranges: RayleighRanges,
    pub bound: ParameterBound,
    pub joint: JointBound,
}

pub fn analyze(sys: &SaddleSystem, choice: &BChoice, params: GstsParams) -> Result<Analysis> {
    check_analysis_cap(sys.n())?;
    let b = build_b(sys, choice, params.tau)?;
    let regime = Regime::of(&b);
    let red = reduced_system(sys)?;
    let ranges = rayleigh_ranges_of(&red, &b)?;
    let pre = GstsPreconditioner::new(sys, b, params)?;
    let d = iteration_defect_of(sys, &pre)?;
    let g = DenseMatrix::identity(d.nrows(), d.ncols()) - &d;
    let report = check_semiconvergence_with_defect(&g, &d, regime, sys)?;
    let bound = parameter_bound(ranges.alpha, ranges.beta_hull(), params)?;
    let joint = joint_bound(ranges.ratio, params)?;
    Ok(Analysis {
        regime,
        params,
        report,
        ranges,
        bound,
        joint,
    })
}

/// Closed-form GSOR parameters from the extreme nonzero eigenvalues of
/// `Q⁻¹ EᵀM⁻¹E`, `Q = I + EᵀP⁻¹E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsorOptimum {
    pub mu_min: f64,
    pub mu_max: f64,
    /// `4√(μ_min μ_max) / (√μ_min + √μ_max)²`.
    pub omega: f64,
    /// `1 / √(μ_min μ_max)`.
    pub nu_g: f64,
}

pub fn gsor_optimal_parameters(sys: &SaddleSystem, p_choice: PChoice) -> Result<GsorOptimum> {
    let s = schur_complement_dense(sys)?;
    let q = shifted_schur(sys, p_choice)?.to_dense();
    let chol = q.cholesky().ok_or(Error::NotPositiveDefinite {
        pivot: 0,
        value: f64::NAN,
    })?;
    let l = chol.l();
    let linv_s = l
        .solve_lower_triangular(&s)
        .ok_or(Error::NoConvergence { routine: "triangular solve" })?;
    let k = l
        .solve_lower_triangular(&linv_s.transpose())
        .ok_or(Error::NoConvergence { routine: "triangular solve" })?;
    let vals = symmetric_eigvals(&k)?;
    let top = vals.last().copied().unwrap_or(0.0);
    let cut = default_rank_tolerance(k.nrows(), k.ncols(), top.abs()).max(1e-10 * top.abs());
    let nonzero: Vec<f64> = vals.into_iter().filter(|&v| v > cut).collect();
    let (mu_min, mu_max) = extremes(&nonzero)?;
    let g = (mu_min * mu_max).sqrt();
    Ok(GsorOptimum {
        mu_min,
        mu_max,
        omega: 4.0 * g / (mu_min.sqrt() + mu_max.sqrt()).powi(2),
        nu_g: 1.0 / g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{mac_stokes_benchmark, random_rank_deficient, StokesConfig};
    use crate::splitting::triangular_parts;

    fn stokes(l: usize, nu: f64) -> SaddleSystem {
        mac_stokes_benchmark(&StokesConfig::new(l, nu).unwrap()).unwrap()
    }

    #[test]
    fn tiny_tau_gives_identity() {
        let sys = stokes(3, 1.0);
        let g = iteration_matrix(
            &sys,
            &BChoice::ShiftedDiag,
            GstsParams::new(1.0, 1.0, 1e-12).unwrap(),
        )
        .unwrap();
        let id = DenseMatrix::identity(sys.n(), sys.n());
        assert!((g - id).amax() <= 1e-9);
    }

    #[test]
    fn matches_block_formula() {
        let sys = stokes(2, 1.0);
        let params = GstsParams::new(1.0, 1.0, 1.0).unwrap();
        let g = iteration_matrix(&sys, &BChoice::ShiftedDiag, params).unwrap();
        let b = build_b(&sys, &BChoice::ShiftedDiag, 1.0).unwrap();
        let (kl, ku) = triangular_parts(&sys);
        let (p, q) = (sys.p(), sys.q());
        let mut bc = DenseMatrix::zeros(p + q, p + q);
        bc.view_mut((0, 0), (p, p)).copy_from(&sys.m().to_dense());
        bc.view_mut((p, p), (q, q)).copy_from(&b.to_dense());
        let bc_inv = bc.clone().try_inverse().unwrap();
        let left = &bc + kl.to_dense() * params.omega1;
        let right = &bc + ku.to_dense() * params.omega2;
        let b_omega = left * &bc_inv * right;
        let expect = DenseMatrix::identity(p + q, p + q)
            - b_omega.try_inverse().unwrap() * sys.block_matrix_dense() * params.tau;
        assert!((g - expect).amax() < 1e-10);
    }

    #[test]
    fn singular_regime_fixes_null_space_of_a() {
        let sys = stokes(3, 0.1);
        let g = iteration_matrix(&sys, &BChoice::SchurExact, GstsParams::new(0.7, 0.4, 0.9).unwrap())
            .unwrap();
        let null_a = null_space(&sys.block_matrix_dense()).unwrap();
        assert_eq!(null_a.ncols(), 1);
        let gx = &g * &null_a;
        assert!((gx - &null_a).amax() < 1e-10);
    }

    #[test]
    fn identity_on_zero_operator() {
        let m = SparseMatrix::identity(3);
        let e = SparseMatrix::zeros(3, 2);
        let sys = SaddleSystem::new(m, e, vec![0.0; 3], vec![0.0; 2]).unwrap();
        let g = DenseMatrix::identity(5, 5) - sys.block_matrix_dense();
        let g = DenseMatrix::identity(5, 5) + (g.clone() - g);
        let r = check_semiconvergence(&g, Regime::Nonsingular, &sys).unwrap();
        assert_eq!(r.gamma, 0.0);
        assert!(r.index_one);
        assert!(r.semiconvergent());
    }

    #[test]
    fn schur_exact_admissible_point_semiconverges() {
        let sys = stokes(3, 1.0);
        let a = analyze(&sys, &BChoice::SchurExact, GstsParams::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(a.regime, Regime::Singular);
        assert!(a.report.gamma < 1.0);
        assert!(a.report.index_one);
        assert_eq!(a.report.nullspace_ok, Some(true));
        assert!(a.joint.sufficient);
        assert!((a.joint.upper.unwrap() - 2.0).abs() < 1e-8);
        assert!(a.bound.upper.unwrap() <= a.joint.upper.unwrap() + 1e-12);
    }

    #[test]
    fn outside_interval_is_flagged() {
        let sys = stokes(3, 1.0);
        let a = analyze(&sys, &BChoice::SchurExact, GstsParams::new(1.0, 1.0, 2.5).unwrap()).unwrap();
        assert!(!a.bound.sufficient);
        assert!(!a.joint.sufficient);
    }

    #[test]
    fn equal_alpha_beta_values() {
        assert!((tau_interval(1.0, 1.0, 1.0, 0.0).unwrap().unwrap() - 2.0).abs() < 1e-15);
        let u = tau_interval(2.0, 2.0, 2.0, 0.0).unwrap().unwrap();
        assert!((u - (3.0 - 5f64.sqrt())).abs() < 1e-14);
        assert_eq!(tau_interval(1.0, 1.0, 3.0, 3.0).unwrap(), None);
        assert!(tau_interval(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(tau_interval(1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn schur_exact_alpha_equals_beta() {
        let sys = stokes(3, 0.5);
        let r = rayleigh_ranges(&sys, &BChoice::SchurExact, 1.0).unwrap();
        assert!((r.alpha.0 - r.beta_block.0).abs() < 1e-10 * r.alpha.1);
        assert!((r.alpha.1 - r.beta_block.1).abs() < 1e-10 * r.alpha.1);
        assert!((r.beta_block.0 - r.beta_schur.0).abs() < 1e-9 * r.alpha.1);
    }

    #[test]
    fn unit_column_alpha_is_one() {
        let e = SparseMatrix::from_triplets(3, 1, [(0, 0, 1.0)]).unwrap();
        let sys = SaddleSystem::new(SparseMatrix::identity(3), e, vec![0.0; 3], vec![0.0]).unwrap();
        let r = rayleigh_ranges(&sys, &BChoice::ShiftedDiag, 1.0).unwrap();
        assert_eq!(r.alpha, (1.0, 1.0));
    }

    #[test]
    fn reduced_spectrum_matches_full() {
        let sys = stokes(2, 1.0);
        let params = GstsParams::new(0.8, 0.5, 0.9).unwrap();
        let g = iteration_matrix(&sys, &BChoice::ShiftedDiag, params).unwrap();
        let gr = reduced_iteration_matrix(&sys, &BChoice::ShiftedDiag, params).unwrap();
        let mut full = eigvals(&g).unwrap();
        let mut red = eigvals(&gr).unwrap();
        red.extend(std::iter::repeat_n(Complex64::new(1.0, 0.0), sys.q() - 3));
        let key = |z: &Complex64| (z.re, z.im);
        full.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        red.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        assert_eq!(full.len(), red.len());
        for (a, b) in full.iter().zip(&red) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn random_system_interval_nonempty_and_semiconvergent() {
        let sys = random_rank_deficient(8, 5, 3, 11).unwrap();
        let params = GstsParams::new(1.0, 1.0, 1.0).unwrap();
        let r = rayleigh_ranges(&sys, &BChoice::ShiftedDiag, 1.0).unwrap();
        let bound = parameter_bound(r.alpha, r.beta_hull(), params).unwrap();
        let upper = bound.upper.unwrap();
        let params = GstsParams::new(1.0, 1.0, 0.5 * upper).unwrap();
        let a = analyze(&sys, &BChoice::ShiftedDiag, params).unwrap();
        assert!(a.report.semiconvergent());
    }

    #[test]
    fn cap_enforced() {
        let sys = stokes(14, 1.0);
        assert!(matches!(
            iteration_matrix(&sys, &BChoice::ShiftedDiag, GstsParams::new(1.0, 1.0, 1.0).unwrap()),
            Err(Error::SizeCapExceeded { .. })
        ));
    }
}
