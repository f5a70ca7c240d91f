//! Real linear-algebra kernels: CSR storage, sparse SPD solves and dense
//! decompositions.

mod cholesky;
mod dense;
mod sparse;

pub use cholesky::{
    conjugate_gradient, solve_with_fallback, spd_solve, SparseCholesky, CG_FALLBACK_TOL,
    SPD_SOLVE_TOL,
};
pub use dense::{
    default_rank_tolerance, eigvals, max_principal_angle, null_space, numerical_rank, pinv,
    pseudo_spectral_radius, pseudo_spectral_radius_of, rank_of, spectral_radius_of, svd,
    symmetric_eigvals, DenseMatrix, PseudoInverseFactor, SvdFactor, DEFAULT_ONE_TOLERANCE,
};
pub use sparse::SparseMatrix;

pub(crate) use cholesky::{dot, norm};

/// Square linear map `x ↦ A x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.rows(), self.cols(), "operator must be square");
        self.rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols(), "operator must be square");
        self.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let v = self * nalgebra::DVector::from_column_slice(x);
        y.copy_from_slice(v.as_slice());
    }
}

/// Dense column vector from a slice.
pub fn dvec(x: &[f64]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_column_slice(x)
}
