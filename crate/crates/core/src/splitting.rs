//! Triangular splitting of the skew part, the B-choices used by the GSTS
//! family, and the preconditioners built from them (GSTS, HSS, constraint).

use crate::error::{check_len, Error, Result};
use crate::linalg::{
    solve_with_fallback, svd, DenseMatrix, LinearOperator, PseudoInverseFactor,
    SparseCholesky, SparseMatrix,
};
use crate::problem::SaddleSystem;

/// Largest `p + q` for which `B(ω₁, ω₂)` and the splitting blocks are
/// materialized densely.
pub const MATERIALIZE_CAP: usize = 2000;
/// Largest `q` for which the Schur complement `EᵀM⁻¹E` is formed densely.
pub const SCHUR_DENSE_CAP: usize = 1000;
/// Relative tolerance on `‖E N‖` (N a null basis of B) for the pseudoinverse
/// block formula to be accepted.
pub const NULLSPACE_TOL: f64 = 1e-8;

/// Approximation `P` of `M` used by the shifted and constraint choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PChoice {
    Diagonal,
    Tridiagonal,
}

impl PChoice {
    pub fn build(self, m: &SparseMatrix) -> SparseMatrix {
        match self {
            PChoice::Diagonal => m.diagonal_part(),
            PChoice::Tridiagonal => m.tridiagonal_part(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            PChoice::Diagonal => "diag",
            PChoice::Tridiagonal => "tridiag",
        }
    }
}

/// The (2,2) block B of the block-diagonal part `B_c = blockdiag(M, B)`.
#[derive(Debug, Clone)]
pub enum BChoice {
    /// `EᵀM⁻¹E`, singular whenever E is rank deficient.
    SchurExact,
    /// `I + EᵀP⁻¹E` with `P = diag(M)`.
    ShiftedDiag,
    /// `I + EᵀP⁻¹E` with `P = tridiag(M)`.
    ShiftedTridiag,
    /// `(τ/ν_g)(I + EᵀP⁻¹E)`, `P = diag(M)`.
    GsorDiag { nu_g: f64 },
    /// `(τ/ν_g)(I + EᵀP⁻¹E)`, `P = tridiag(M)`.
    GsorTridiag { nu_g: f64 },
    /// User-supplied symmetric positive definite B.
    CustomHpd(SparseMatrix),
    /// User-supplied symmetric positive semidefinite B, applied through its
    /// pseudoinverse. Requires `null(B) = null(E)`.
    CustomSingular(DenseMatrix),
}

impl BChoice {
    pub fn name(&self) -> &'static str {
        match self {
            BChoice::SchurExact => "schur-exact",
            BChoice::ShiftedDiag => "shifted-diag",
            BChoice::ShiftedTridiag => "shifted-tridiag",
            BChoice::GsorDiag { .. } => "gsor-diag",
            BChoice::GsorTridiag { .. } => "gsor-tridiag",
            BChoice::CustomHpd(_) => "custom-hpd",
            BChoice::CustomSingular(_) => "custom-singular",
        }
    }

    /// `P` of the shifted form `I + EᵀP⁻¹E`, if any.
    pub fn p_choice(&self) -> Option<PChoice> {
        match self {
            BChoice::ShiftedDiag | BChoice::GsorDiag { .. } => Some(PChoice::Diagonal),
            BChoice::ShiftedTridiag | BChoice::GsorTridiag { .. } => Some(PChoice::Tridiagonal),
            _ => None,
        }
    }
}

/// Iteration parameters `(ω₁, ω₂, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GstsParams {
    pub omega1: f64,
    pub omega2: f64,
    pub tau: f64,
}

impl GstsParams {
    pub fn new(omega1: f64, omega2: f64, tau: f64) -> Result<Self> {
        let p = Self {
            omega1,
            omega2,
            tau,
        };
        p.check_ranges()?;
        Ok(p)
    }

    /// The `ω₁ = τ` reduction used for all tabulated runs.
    pub fn tied(omega2: f64, tau: f64) -> Result<Self> {
        Self::new(tau, omega2, tau)
    }

    pub fn omega_tilde(&self) -> f64 {
        (self.omega1 - 1.0) * (self.omega2 - 1.0)
    }

    fn check_ranges(&self) -> Result<()> {
        let finite = self.omega1.is_finite() && self.omega2.is_finite() && self.tau.is_finite();
        if !finite || self.omega1 < 0.0 || self.omega2 < 0.0 || self.tau <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need omega1, omega2 >= 0 and tau > 0, got ({}, {}, {})",
                self.omega1, self.omega2, self.tau
            )));
        }
        Ok(())
    }

    /// Full check for use as an iteration: additionally one of the omegas
    /// must be nonzero.
    pub fn validate(&self) -> Result<()> {
        self.check_ranges()?;
        if self.omega1 == 0.0 && self.omega2 == 0.0 {
            return Err(Error::InvalidParameter(
                "at least one of omega1, omega2 must be nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// A prepared B: Cholesky-factored when nonsingular, pseudoinverse otherwise.
#[derive(Debug, Clone)]
pub enum BuiltB {
    /// `B = scale · matrix` with `matrix` SPD.
    Nonsingular {
        matrix: SparseMatrix,
        factor: SparseCholesky,
        scale: f64,
    },
    Singular {
        matrix: DenseMatrix,
        pinv: PseudoInverseFactor,
        /// `‖E N‖_F / ‖E‖_F` for an orthonormal null basis N of B.
        nullspace_residual: f64,
    },
}

impl BuiltB {
    pub fn dim(&self) -> usize {
        match self {
            BuiltB::Nonsingular { matrix, .. } => matrix.rows(),
            BuiltB::Singular { matrix, .. } => matrix.nrows(),
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, BuiltB::Singular { .. })
    }

    /// `B⁻¹ v` or `B† v`.
    pub fn apply_inverse(&self, v: &[f64]) -> Vec<f64> {
        match self {
            BuiltB::Nonsingular {
                matrix,
                factor,
                scale,
            } => {
                let mut x = solve_with_fallback(matrix, factor, v);
                x.iter_mut().for_each(|xi| *xi /= scale);
                x
            }
            BuiltB::Singular { pinv, .. } => pinv.apply_unchecked(v),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            BuiltB::Nonsingular { matrix, scale, .. } => {
                let mut y = matrix.mul_vec(v);
                y.iter_mut().for_each(|yi| *yi *= scale);
                y
            }
            BuiltB::Singular { matrix, .. } => matrix.apply(v),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            BuiltB::Nonsingular { matrix, scale, .. } => matrix.to_dense() * *scale,
            BuiltB::Singular { matrix, .. } => matrix.clone(),
        }
    }

    /// Dense `B⁻¹` or `B†`.
    pub fn inverse_dense(&self) -> Result<DenseMatrix> {
        match self {
            BuiltB::Nonsingular { .. } => {
                let n = self.dim();
                let mut out = DenseMatrix::zeros(n, n);
                let mut e = vec![0.0; n];
                for j in 0..n {
                    e[j] = 1.0;
                    let col = self.apply_inverse(&e);
                    out.column_mut(j).copy_from_slice(&col);
                    e[j] = 0.0;
                }
                Ok(out)
            }
            BuiltB::Singular { pinv, .. } => Ok(pinv.matrix().clone()),
        }
    }
}

/// `Eᵀ P⁻¹ E` as a sparse matrix, one P-solve per column of E. Exact zeros
/// produced by the solves are dropped and the result is symmetrized.
fn congruence(e: &SparseMatrix, p: &SparseMatrix) -> Result<SparseMatrix> {
    let factor = SparseCholesky::factor(p)?;
    let et = e.transpose();
    let (rows, q) = (e.rows(), e.cols());
    let mut trip = Vec::new();
    let mut col = vec![0.0; rows];
    for j in 0..q {
        col.iter_mut().for_each(|c| *c = 0.0);
        for (i, v) in et.row(j) {
            col[i] = v;
        }
        let x = solve_with_fallback(p, &factor, &col);
        for (i, v) in et.mul_vec(&x).into_iter().enumerate() {
            if v != 0.0 {
                trip.push((i, j, v));
            }
        }
    }
    let s = SparseMatrix::from_triplets(q, q, trip)?;
    s.linear_combination(0.5, &s.transpose(), 0.5)
}

/// `I + EᵀP⁻¹E`.
pub fn shifted_schur(sys: &SaddleSystem, p: PChoice) -> Result<SparseMatrix> {
    let s = congruence(sys.e(), &p.build(sys.m()))?;
    s.linear_combination(1.0, &SparseMatrix::identity(sys.q()), 1.0)
}

/// Dense `S = EᵀM⁻¹E`, exactly symmetric.
pub fn schur_complement_dense(sys: &SaddleSystem) -> Result<DenseMatrix> {
    if sys.q() > SCHUR_DENSE_CAP {
        return Err(Error::SizeCapExceeded {
            what: "Schur complement",
            size: sys.q(),
            cap: SCHUR_DENSE_CAP,
        });
    }
    let s = congruence(sys.e(), sys.m())?.to_dense();
    Ok((&s + s.transpose()) * 0.5)
}

fn nullspace_residual(e: &SparseMatrix, null_basis: &DenseMatrix) -> f64 {
    let enorm = e.frobenius_norm();
    if null_basis.ncols() == 0 || enorm == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for col in null_basis.column_iter() {
        let en = e.mul_vec(col.as_slice());
        acc += en.iter().map(|v| v * v).sum::<f64>();
    }
    acc.sqrt() / enorm
}

/// `‖B N_E‖ / ‖B‖` for a basis `N_E` of null(E); with the forward residual
/// this makes the check two-sided, so it tests equality of the null spaces.
fn reverse_nullspace_residual(sys: &SaddleSystem, b: &DenseMatrix) -> Result<f64> {
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok(0.0);
    }
    let n_e = svd(&sys.e().to_dense())?.null_space();
    Ok((b * n_e).norm() / bnorm)
}

fn singular_b(sys: &SaddleSystem, matrix: DenseMatrix) -> Result<BuiltB> {
    check_len("B rows", sys.q(), matrix.nrows())?;
    check_len("B cols", sys.q(), matrix.ncols())?;
    let pinv = PseudoInverseFactor::from_matrix(&matrix)?;
    let residual = nullspace_residual(sys.e(), &pinv.svd.null_space())
        .max(reverse_nullspace_residual(sys, &matrix)?);
    if residual > NULLSPACE_TOL {
        return Err(Error::NullSpaceCondition { residual });
    }
    Ok(BuiltB::Singular {
        matrix,
        pinv,
        nullspace_residual: residual,
    })
}

fn nonsingular_b(matrix: SparseMatrix, scale: f64) -> Result<BuiltB> {
    let factor = SparseCholesky::factor(&matrix)?;
    Ok(BuiltB::Nonsingular {
        matrix,
        factor,
        scale,
    })
}

/// Prepares the chosen B. `tau` only matters for the GSOR choices, whose B
/// carries the factor `τ/ν_g`.
pub fn build_b(sys: &SaddleSystem, choice: &BChoice, tau: f64) -> Result<BuiltB> {
    let gsor_scale = |nu_g: f64| {
        if !(nu_g > 0.0 && nu_g.is_finite()) || !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "GSOR needs nu_g > 0 and tau > 0, got nu_g={nu_g}, tau={tau}"
            )));
        }
        Ok(tau / nu_g)
    };
    match choice {
        BChoice::SchurExact => singular_b(sys, schur_complement_dense(sys)?),
        BChoice::ShiftedDiag => nonsingular_b(shifted_schur(sys, PChoice::Diagonal)?, 1.0),
        BChoice::ShiftedTridiag => nonsingular_b(shifted_schur(sys, PChoice::Tridiagonal)?, 1.0),
        BChoice::GsorDiag { nu_g } => {
            nonsingular_b(shifted_schur(sys, PChoice::Diagonal)?, gsor_scale(*nu_g)?)
        }
        BChoice::GsorTridiag { nu_g } => {
            nonsingular_b(shifted_schur(sys, PChoice::Tridiagonal)?, gsor_scale(*nu_g)?)
        }
        BChoice::CustomHpd(b) => {
            check_len("B rows", sys.q(), b.rows())?;
            nonsingular_b(b.clone(), 1.0)
        }
        BChoice::CustomSingular(b) => {
            let asym = (b - b.transpose()).amax();
            if asym > 1e-12 * b.amax().max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter("custom B must be symmetric".into()));
            }
            singular_b(sys, b.clone())
        }
    }
}

/// `K_L = [[0, 0], [−Eᵀ, 0]]`, `K_U = [[0, E], [0, 0]]`, so `K_L + K_U = A_S`.
pub fn triangular_parts(sys: &SaddleSystem) -> (SparseMatrix, SparseMatrix) {
    let (p, q) = (sys.p(), sys.q());
    let neg_et = sys.e().transpose().scaled(-1.0);
    let zp = SparseMatrix::zeros(p, p);
    let zq = SparseMatrix::zeros(q, q);
    let k_l = SparseMatrix::block(&[vec![Some(&zp), None], vec![Some(&neg_et), Some(&zq)]])
        .expect("block shapes agree");
    let k_u = SparseMatrix::block(&[vec![Some(&zp), Some(sys.e())], vec![None, Some(&zq)]])
        .expect("block shapes agree");
    (k_l, k_u)
}

fn check_cap(what: &'static str, size: usize) -> Result<()> {
    if size > MATERIALIZE_CAP {
        return Err(Error::SizeCapExceeded {
            what,
            size,
            cap: MATERIALIZE_CAP,
        });
    }
    Ok(())
}

/// Dense `B_c = blockdiag(M, B)`.
pub fn block_diagonal_dense(sys: &SaddleSystem, b: &BuiltB) -> Result<DenseMatrix> {
    check_cap("B_c", sys.n())?;
    let p = sys.p();
    let mut out = DenseMatrix::zeros(sys.n(), sys.n());
    out.view_mut((0, 0), (p, p)).copy_from(&sys.m().to_dense());
    out.view_mut((p, p), (sys.q(), sys.q()))
        .copy_from(&b.to_dense());
    Ok(out)
}

/// Dense `B_c⁻¹` or `B_c†` (blockwise).
pub fn block_diagonal_inverse_dense(sys: &SaddleSystem, b: &BuiltB) -> Result<DenseMatrix> {
    check_cap("B_c", sys.n())?;
    let p = sys.p();
    let minv = sys
        .m()
        .to_dense()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            pivot: 0,
            value: f64::NAN,
        })?
        .inverse();
    let mut out = DenseMatrix::zeros(sys.n(), sys.n());
    out.view_mut((0, 0), (p, p)).copy_from(&minv);
    out.view_mut((p, p), (sys.q(), sys.q()))
        .copy_from(&b.inverse_dense()?);
    Ok(out)
}

/// Applies `B(ω₁, ω₂)⁻¹` (nonsingular B) or `B(ω₁, ω₂)†` (singular B).
#[derive(Debug, Clone)]
pub struct GstsPreconditioner {
    m: SparseMatrix,
    m_factor: SparseCholesky,
    e: SparseMatrix,
    b: BuiltB,
    params: GstsParams,
}

impl GstsPreconditioner {
    pub fn new(sys: &SaddleSystem, b: BuiltB, params: GstsParams) -> Result<Self> {
        check_len("B dimension", sys.q(), b.dim())?;
        params.check_ranges()?;
        Ok(Self {
            m: sys.m().clone(),
            m_factor: SparseCholesky::factor(sys.m())?,
            e: sys.e().clone(),
            b,
            params,
        })
    }

    pub fn build(sys: &SaddleSystem, choice: &BChoice, params: GstsParams) -> Result<Self> {
        let b = build_b(sys, choice, params.tau)?;
        Self::new(sys, b, params)
    }

    pub fn params(&self) -> GstsParams {
        self.params
    }

    pub fn b(&self) -> &BuiltB {
        &self.b
    }

    pub fn p(&self) -> usize {
        self.m.rows()
    }

    pub fn q(&self) -> usize {
        self.e.cols()
    }

    pub fn m_solve(&self, v: &[f64]) -> Vec<f64> {
        solve_with_fallback(&self.m, &self.m_factor, v)
    }

    pub fn apply_checked(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len("preconditioner input", self.p() + self.q(), r.len())?;
        Ok(LinearOperator::apply(self, r))
    }

    /// `B(ω₁, ω₂) = [[M, ω₂E], [−ω₁Eᵀ, B − ω₁ω₂EᵀM⁻¹E]]`.
    pub fn materialize_b_omega(&self) -> Result<DenseMatrix> {
        let (p, q) = (self.p(), self.q());
        check_cap("B(omega1, omega2)", p + q)?;
        let GstsParams { omega1, omega2, .. } = self.params;
        let e = self.e.to_dense();
        let mut out = DenseMatrix::zeros(p + q, p + q);
        out.view_mut((0, 0), (p, p)).copy_from(&self.m.to_dense());
        out.view_mut((0, p), (p, q)).copy_from(&(&e * omega2));
        out.view_mut((p, 0), (q, p))
            .copy_from(&(e.transpose() * -omega1));
        let mut b22 = self.b.to_dense();
        if omega1 * omega2 != 0.0 {
            let mut minv_e = DenseMatrix::zeros(p, q);
            for j in 0..q {
                let col = self.m_solve(e.column(j).as_slice());
                minv_e.column_mut(j).copy_from_slice(&col);
            }
            b22 -= e.transpose() * minv_e * (omega1 * omega2);
        }
        out.view_mut((p, p), (q, q)).copy_from(&b22);
        Ok(out)
    }
}

impl LinearOperator for GstsPreconditioner {
    fn dim(&self) -> usize {
        self.p() + self.q()
    }

    /// `t = M⁻¹r₁`, `z₂ = B∘(ω₁Eᵀt + r₂)`, `z₁ = t − ω₂M⁻¹E z₂`.
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let p = self.p();
        let (r1, r2) = r.split_at(p);
        let GstsParams { omega1, omega2, .. } = self.params;
        let t = self.m_solve(r1);
        let mut rhs = self.e.mul_transpose_vec(&t);
        for (a, b) in rhs.iter_mut().zip(r2) {
            *a = omega1 * *a + b;
        }
        let w = self.b.apply_inverse(&rhs);
        let (z1, z2) = z.split_at_mut(p);
        z2.copy_from_slice(&w);
        if omega2 != 0.0 {
            let s = self.m_solve(&self.e.mul_vec(&w));
            for ((zi, ti), si) in z1.iter_mut().zip(&t).zip(&s) {
                *zi = ti - omega2 * si;
            }
        } else {
            z1.copy_from_slice(&t);
        }
    }
}

/// `P_h⁻¹ = (αI + A_S)⁻¹ (αI + A_H)⁻¹`.
#[derive(Debug, Clone)]
pub struct HssPreconditioner {
    alpha: f64,
    e: SparseMatrix,
    shifted_m: SparseMatrix,
    shifted_m_factor: SparseCholesky,
    skew_schur: SparseMatrix,
    skew_schur_factor: SparseCholesky,
}

impl HssPreconditioner {
    pub fn new(sys: &SaddleSystem, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("HSS alpha must be > 0, got {alpha}")));
        }
        let shifted_m = sys
            .m()
            .linear_combination(1.0, &SparseMatrix::identity(sys.p()), alpha)?;
        let ete = sys.e().transpose().matmul(sys.e())?;
        let ete = ete.linear_combination(0.5, &ete.transpose(), 0.5)?;
        let skew_schur = ete.linear_combination(1.0 / alpha, &SparseMatrix::identity(sys.q()), alpha)?;
        Ok(Self {
            alpha,
            e: sys.e().clone(),
            shifted_m_factor: SparseCholesky::factor(&shifted_m)?,
            shifted_m,
            skew_schur_factor: SparseCholesky::factor(&skew_schur)?,
            skew_schur,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl LinearOperator for HssPreconditioner {
    fn dim(&self) -> usize {
        self.e.rows() + self.e.cols()
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let p = self.e.rows();
        let a = self.alpha;
        let (r1, r2) = r.split_at(p);
        let y1 = solve_with_fallback(&self.shifted_m, &self.shifted_m_factor, r1);
        let y2: Vec<f64> = r2.iter().map(|v| v / a).collect();
        let mut rhs = self.e.mul_transpose_vec(&y1);
        for (s, y) in rhs.iter_mut().zip(&y2) {
            *s = y + *s / a;
        }
        let x2 = solve_with_fallback(&self.skew_schur, &self.skew_schur_factor, &rhs);
        let ex2 = self.e.mul_vec(&x2);
        let (z1, z2) = z.split_at_mut(p);
        for ((zi, yi), ei) in z1.iter_mut().zip(&y1).zip(&ex2) {
            *zi = (yi - ei) / a;
        }
        z2.copy_from_slice(&x2);
    }
}

/// Constraint preconditioner `[[P, E], [−Eᵀ, I]]` applied through its Schur
/// complement `I + EᵀP⁻¹E`.
#[derive(Debug, Clone)]
pub struct ConstraintPreconditioner {
    p_choice: PChoice,
    e: SparseMatrix,
    p_mat: SparseMatrix,
    p_factor: SparseCholesky,
    schur: SparseMatrix,
    schur_factor: SparseCholesky,
}

impl ConstraintPreconditioner {
    pub fn new(sys: &SaddleSystem, p_choice: PChoice) -> Result<Self> {
        let p_mat = p_choice.build(sys.m());
        let schur = shifted_schur(sys, p_choice)?;
        Ok(Self {
            p_choice,
            e: sys.e().clone(),
            p_factor: SparseCholesky::factor(&p_mat)?,
            p_mat,
            schur_factor: SparseCholesky::factor(&schur)?,
            schur,
        })
    }

    pub fn p_choice(&self) -> PChoice {
        self.p_choice
    }

    /// Dense `[[P, E], [−Eᵀ, I]]`.
    pub fn materialize(&self) -> Result<DenseMatrix> {
        let (p, q) = (self.e.rows(), self.e.cols());
        check_cap("constraint preconditioner", p + q)?;
        let e = self.e.to_dense();
        let mut out = DenseMatrix::zeros(p + q, p + q);
        out.view_mut((0, 0), (p, p)).copy_from(&self.p_mat.to_dense());
        out.view_mut((0, p), (p, q)).copy_from(&e);
        out.view_mut((p, 0), (q, p)).copy_from(&(-e.transpose()));
        out.view_mut((p, p), (q, q))
            .copy_from(&DenseMatrix::identity(q, q));
        Ok(out)
    }
}

impl LinearOperator for ConstraintPreconditioner {
    fn dim(&self) -> usize {
        self.e.rows() + self.e.cols()
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let p = self.e.rows();
        let (r1, r2) = r.split_at(p);
        let pr1 = solve_with_fallback(&self.p_mat, &self.p_factor, r1);
        let mut rhs = self.e.mul_transpose_vec(&pr1);
        for (s, v) in rhs.iter_mut().zip(r2) {
            *s += v;
        }
        let x2 = solve_with_fallback(&self.schur, &self.schur_factor, &rhs);
        let mut t = self.e.mul_vec(&x2);
        for (ti, ri) in t.iter_mut().zip(r1) {
            *ti = ri - *ti;
        }
        let x1 = solve_with_fallback(&self.p_mat, &self.p_factor, &t);
        let (z1, z2) = z.split_at_mut(p);
        z1.copy_from_slice(&x1);
        z2.copy_from_slice(&x2);
    }
}

/// Dense `(αI + A_H)(αI + A_S)`.
pub fn materialize_hss(sys: &SaddleSystem, alpha: f64) -> Result<DenseMatrix> {
    check_cap("HSS preconditioner", sys.n())?;
    let split = crate::problem::split_hermitian(sys);
    let id = DenseMatrix::identity(sys.n(), sys.n());
    Ok((&id * alpha + split.a_h.to_dense()) * (&id * alpha + split.a_s.to_dense()))
}

/// Two-sided null-space mismatch `max(‖E N_B‖/‖E‖, ‖B N_E‖/‖B‖)` of a dense
/// symmetric B; exposed for diagnostics.
pub fn nullspace_mismatch(sys: &SaddleSystem, b: &DenseMatrix) -> Result<f64> {
    let basis = svd(b)?.null_space();
    Ok(nullspace_residual(sys.e(), &basis).max(reverse_nullspace_residual(sys, b)?))
}
