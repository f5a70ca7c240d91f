//! Dense kernels: SVD, Moore–Penrose pseudoinverse, eigenvalues and
//! numerical rank. Storage is `nalgebra`; decompositions are delegated to
//! `faer`, whose SVD and eigensolvers stay backward stable on the clustered
//! spectra met here. This module fixes conventions (full orthogonal factors,
//! sorted singular values, rank tolerance) and turns failures into errors.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

pub type DenseMatrix = DMatrix<f64>;

/// Default tolerance for excluding the eigenvalue 1 from the
/// pseudo-spectral radius.
pub const DEFAULT_ONE_TOLERANCE: f64 = 1e-8;

/// `max(rows, cols) · ε · σ₁`.
pub fn default_rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Full singular value decomposition `A = U Σ Vᵀ` with square orthogonal
/// `U` (rows × rows) and `V` (cols × cols).
#[derive(Debug, Clone)]
pub struct SvdFactor {
    pub u: DenseMatrix,
    /// Nonincreasing, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
    pub rank_tolerance: f64,
}

impl SvdFactor {
    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v.nrows()
    }

    /// Count of singular values above the rank tolerance.
    pub fn rank(&self) -> usize {
        self.singular_values
            .iter()
            .take_while(|&&s| s > self.rank_tolerance)
            .count()
    }

    pub fn with_rank_tolerance(mut self, tol: f64) -> Self {
        self.rank_tolerance = tol;
        self
    }

    /// Columns of `V` spanning the numerical null space.
    pub fn null_space(&self) -> DenseMatrix {
        let r = self.rank();
        self.v.columns(r, self.cols() - r).into_owned()
    }

    /// Columns of `U` spanning the orthogonal complement of the range.
    pub fn left_null_space(&self) -> DenseMatrix {
        let r = self.rank();
        self.u.columns(r, self.rows() - r).into_owned()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.singular_values.len();
        let mut us = self.u.columns(0, k).into_owned();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.columns(0, k).transpose()
    }

    /// Size of the relative gap at the rank cut, `σ_{r+1} / σ_r`; `None` when
    /// there is nothing on one side of the cut.
    pub fn gap_ratio(&self) -> Option<f64> {
        let r = self.rank();
        (r > 0 && r < self.singular_values.len())
            .then(|| self.singular_values[r] / self.singular_values[r - 1])
    }
}

fn to_faer(a: &DenseMatrix) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DenseMatrix {
    DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub fn svd(a: &DenseMatrix) -> Result<SvdFactor> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("svd input has non-finite entries".into()));
    }
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(SvdFactor {
            u: DenseMatrix::identity(m, m),
            singular_values: Vec::new(),
            v: DenseMatrix::identity(n, n),
            rank_tolerance: 0.0,
        });
    }
    let dec = to_faer(a)
        .svd()
        .map_err(|_| Error::NoConvergence { routine: "svd" })?;
    let singular_values: Vec<f64> = (0..k).map(|i| dec.S()[i]).collect();
    let sigma_max = singular_values[0];
    Ok(SvdFactor {
        u: from_faer(dec.U()),
        v: from_faer(dec.V()),
        rank_tolerance: default_rank_tolerance(m, n, sigma_max),
        singular_values,
    })
}

/// Count of singular values exceeding `tol`.
pub fn rank_of(a: &DenseMatrix, tol: f64) -> Result<usize> {
    if tol < 0.0 {
        return Err(Error::InvalidParameter("rank tolerance must be >= 0".into()));
    }
    Ok(svd(a)?.with_rank_tolerance(tol).rank())
}

/// Rank at the default tolerance `max(m, n)·ε·σ₁`.
pub fn numerical_rank(a: &DenseMatrix) -> Result<usize> {
    Ok(svd(a)?.rank())
}

/// Moore–Penrose pseudoinverse `V diag(σᵢ⁻¹, i ≤ r) Uᵀ`, materialized once so
/// that every application is a single matrix-vector product.
#[derive(Debug, Clone)]
pub struct PseudoInverseFactor {
    pub svd: SvdFactor,
    pub rank: usize,
    matrix: DenseMatrix,
}

impl PseudoInverseFactor {
    pub fn new(svd: SvdFactor) -> Self {
        let rank = svd.rank();
        let mut vs = svd.v.columns(0, rank).into_owned();
        for j in 0..rank {
            vs.column_mut(j).scale_mut(1.0 / svd.singular_values[j]);
        }
        let matrix = vs * svd.u.columns(0, rank).transpose();
        Self { svd, rank, matrix }
    }

    pub fn from_matrix(a: &DenseMatrix) -> Result<Self> {
        Ok(Self::new(svd(a)?))
    }

    /// Length of vectors accepted by [`apply`](Self::apply) (row count of the
    /// original matrix).
    pub fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `A† v`, the minimum-norm least-squares solution of `A x = v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("pseudoinverse input", self.input_dim(), v.len())?;
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[f64]) -> Vec<f64> {
        let x = &self.matrix * DVector::from_column_slice(v);
        x.as_slice().to_vec()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

pub fn pinv(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(PseudoInverseFactor::from_matrix(a)?.matrix)
}

/// Eigenvalues of a general real square matrix (real Schur form).
pub fn eigvals(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    check_len("eigvals: square matrix", n, a.ncols())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("eigvals input has non-finite entries".into()));
    }
    let eigs = to_faer(a)
        .eigenvalues()
        .map_err(|_| Error::NoConvergence { routine: "eigvals" })?;
    Ok(eigs.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigvals(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_len("symmetric_eigvals: square matrix", a.nrows(), a.ncols())?;
    let sym = (a + a.transpose()) * 0.5;
    let mut vals = to_faer(&sym)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence {
            routine: "symmetric eigensolver",
        })?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn spectral_radius_of(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max{|λ| : |λ − 1| > one_tol}` over the given eigenvalues, 0 if none.
pub fn pseudo_spectral_radius_of(eigs: &[Complex64], one_tol: f64) -> f64 {
    eigs.iter()
        .filter(|z| (*z - 1.0).norm() > one_tol)
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Pseudo-spectral radius `γ(A)`: largest eigenvalue modulus once every
/// eigenvalue within `one_tol` of 1 is excluded.
pub fn pseudo_spectral_radius(a: &DenseMatrix, one_tol: f64) -> Result<f64> {
    if one_tol <= 0.0 {
        return Err(Error::InvalidParameter("one-tolerance must be positive".into()));
    }
    Ok(pseudo_spectral_radius_of(&eigvals(a)?, one_tol))
}

/// Orthonormal basis of the null space of `a` at the default rank tolerance.
pub fn null_space(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(svd(a)?.null_space())
}

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases; `None` when the dimensions differ.
///
/// Uses `sin θ_max = ‖(I − A Aᵀ) B‖₂`, which stays accurate for tiny angles.
pub fn max_principal_angle(a: &DenseMatrix, b: &DenseMatrix) -> Result<Option<f64>> {
    check_len("principal angles: ambient dimension", a.nrows(), b.nrows())?;
    if a.ncols() != b.ncols() {
        return Ok(None);
    }
    if a.ncols() == 0 {
        return Ok(Some(0.0));
    }
    let residual = b - a * (a.transpose() * b);
    let s = svd(&residual)?;
    let sine = s.singular_values.first().copied().unwrap_or(0.0).min(1.0);
    Ok(Some(sine.asin()))
}
