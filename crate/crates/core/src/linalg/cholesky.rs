//! Sparse SPD solves: envelope (profile) Cholesky with a conjugate-gradient
//! polish for the rare ill-conditioned case.

use crate::error::{check_len, Error, Result};
use crate::linalg::SparseMatrix;

/// Relative residual an SPD solve must reach before CG refinement kicks in.
pub const SPD_SOLVE_TOL: f64 = 1e-10;
/// Relative tolerance of the conjugate-gradient fallback.
pub const CG_FALLBACK_TOL: f64 = 1e-12;

/// Cholesky factor `A = L Lᵀ` stored by rows over the envelope of `A`.
///
/// Row `i` of `L` occupies columns `first[i]..=i`, packed contiguously
/// starting at `start[i]`.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.rows();
        check_len("cholesky: square matrix", n, a.cols())?;
        let scale = a.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if let Some(asym) = a.asymmetry() {
            if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter(format!(
                    "cholesky needs a symmetric matrix (max asymmetry {asym:e})"
                )));
            }
        }

        let first: Vec<usize> = (0..n)
            .map(|i| a.row(i).map(|(j, _)| j).find(|&j| j <= i).unwrap_or(i).min(i))
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(i).filter(|&(j, _)| j <= i) {
                data[start[i] + j - first[i]] = v;
            }
        }

        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let k0 = fi.max(fj);
                let mut s = data[si + j - fi];
                for k in k0..j {
                    s -= data[si + k - fi] * data[sj + k - fj];
                }
                data[si + j - fi] = s / data[sj + j - fj];
            }
            let diag = si + i - fi;
            let s = data[diag] - data[si..diag].iter().map(|v| v * v).sum::<f64>();
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: i, value: s });
            }
            data[diag] = s.sqrt();
        }
        Ok(Self {
            n,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries of `L`.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n, "cholesky solve: wrong rhs length");
        for i in 0..self.n {
            let (fi, si) = (self.first[i], self.start[i]);
            let row = &self.data[si..si + i - fi];
            let dot: f64 = row.iter().zip(&x[fi..i]).map(|(l, y)| l * y).sum();
            x[i] = (x[i] - dot) / self.data[si + i - fi];
        }
        for i in (0..self.n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            x[i] /= self.data[si + i - fi];
            let xi = x[i];
            for (k, l) in (fi..i).zip(&self.data[si..si + i - fi]) {
                x[k] -= l * xi;
            }
        }
    }
}

/// Plain conjugate gradients from the initial guess `x`; returns the number of
/// iterations taken.
pub fn conjugate_gradient(
    a: &SparseMatrix,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> usize {
    let norm_b = norm(b).max(f64::MIN_POSITIVE);
    let ax = a.mul_vec(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..max_iter {
        if rr.sqrt() <= rel_tol * norm_b {
            return it;
        }
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return it;
        }
        let step = rr / pap;
        for i in 0..x.len() {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    max_iter
}

/// Factorizes once and solves; used wherever a one-off SPD solve is needed.
pub fn spd_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_len("spd_solve rhs", a.rows(), b.len())?;
    let factor = SparseCholesky::factor(a)?;
    Ok(solve_with_fallback(a, &factor, b))
}

/// Cholesky solve followed by CG refinement if the residual misses
/// [`SPD_SOLVE_TOL`].
pub fn solve_with_fallback(a: &SparseMatrix, factor: &SparseCholesky, b: &[f64]) -> Vec<f64> {
    let mut x = factor.solve(b);
    let ax = a.mul_vec(&x);
    let res: f64 = b
        .iter()
        .zip(&ax)
        .map(|(b, ax)| (b - ax).powi(2))
        .sum::<f64>()
        .sqrt();
    if res > SPD_SOLVE_TOL * norm(b) {
        conjugate_gradient(a, b, &mut x, CG_FALLBACK_TOL, 10 * a.rows().max(10));
    }
    x
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseMatrix {
        SparseMatrix::from_triplets(
            n,
            n,
            (0..n).flat_map(|i| {
                let mut t = vec![(i, i, 2.0)];
                if i > 0 {
                    t.push((i, i - 1, -1.0));
                }
                if i + 1 < n {
                    t.push((i, i + 1, -1.0));
                }
                t
            }),
        )
        .unwrap()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = [3.0, -1.0, 0.5];
        assert_eq!(spd_solve(&SparseMatrix::identity(3), &b).unwrap(), b.to_vec());
    }

    #[test]
    fn diagonal_solve() {
        let a = SparseMatrix::from_diagonal(&[2.0, 4.0]);
        let x = spd_solve(&a, &[2.0, 4.0]).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn laplacian_round_trip() {
        let a = laplace_1d(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let y = spd_solve(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_names_pivot() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            [(0, 0, 1.0), (1, 1, 1.0), (1, 2, 2.0), (2, 1, 2.0), (2, 2, 1.0)],
        )
        .unwrap();
        match SparseCholesky::factor(&a) {
            Err(Error::NotPositiveDefinite { pivot, value }) => {
                assert_eq!(pivot, 2);
                assert!((value + 3.0).abs() < 1e-14);
            }
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_input_rejected() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 0.5), (1, 1, 1.0)]).unwrap();
        assert!(matches!(
            SparseCholesky::factor(&a),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn cg_converges_on_laplacian() {
        let a = laplace_1d(30);
        let b = vec![1.0; 30];
        let mut x = vec![0.0; 30];
        let its = conjugate_gradient(&a, &b, &mut x, 1e-12, 300);
        assert!(its <= 30 + 1);
        let r = a.mul_vec(&x);
        assert!(r.iter().zip(&b).all(|(r, b)| (r - b).abs() < 1e-9));
    }
}
