//! Compressed sparse row storage.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// Real sparse matrix in compressed-row form.
///
/// Column indices are strictly increasing within each row. Explicit zeros are
/// allowed but never produced by the constructors in this module.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the structure.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len("csr row offsets", rows + 1, row_ptr.len())?;
        check_len("csr values", col_idx.len(), values.len())?;
        if row_ptr[0] != 0 || row_ptr[rows] != col_idx.len() {
            return Err(Error::InvalidParameter(
                "csr offsets must start at 0 and end at nnz".into(),
            ));
        }
        for i in 0..rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidParameter(format!(
                    "csr offsets decrease at row {i}"
                )));
            }
            let row = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
            if row.last().is_some_and(|&c| c >= cols) {
                return Err(Error::InvalidParameter(format!(
                    "column index out of range in row {i}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that sum to exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, v) in &entries {
            if i >= rows || j >= cols {
                return Err(Error::InvalidParameter(format!(
                    "entry ({i}, {j}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite entry at ({i}, {j})"
                )));
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut rows_of: Vec<usize> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            if rows_of.last() == Some(&i) && col_idx.last() == Some(&j) {
                *values.last_mut().unwrap() += v;
            } else {
                rows_of.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        let mut kept_cols = Vec::with_capacity(col_idx.len());
        let mut kept_vals = Vec::with_capacity(values.len());
        for ((i, j), v) in rows_of.into_iter().zip(col_idx).zip(values) {
            if v != 0.0 {
                row_ptr[i + 1] += 1;
                kept_cols.push(j);
                kept_vals.push(v);
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx: kept_cols,
            values: kept_vals,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .expect("diagonal entries are in range")
    }

    /// Converts a dense matrix, dropping exact zeros.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        let triplets = (0..a.nrows())
            .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, a[(i, j)]));
        Self::from_triplets(a.nrows(), a.ncols(), triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Iterates all stored `(row, col, value)` triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "sparse matvec: x has wrong length");
        assert_eq!(y.len(), self.rows, "sparse matvec: y has wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `y = Aᵀ x` without forming the transpose.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "sparse transposed matvec: wrong length");
        let mut y = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (j, v) in self.row(i) {
                    y[j] += v * xi;
                }
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.triplets() {
            let slot = next[j];
            col_idx[slot] = i;
            values[slot] = v;
            next[j] += 1;
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `alpha A + beta B`.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        check_len("sparse sum rows", self.rows, other.rows)?;
        check_len("sparse sum cols", self.cols, other.cols)?;
        let lhs = self.triplets().map(|(i, j, v)| (i, j, alpha * v));
        let rhs = other.triplets().map(|(i, j, v)| (i, j, beta * v));
        Self::from_triplets(self.rows, self.cols, lhs.chain(rhs))
    }

    /// Sparse product `A B`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_len("sparse product inner dimension", self.cols, other.rows)?;
        let mut triplets = Vec::new();
        let mut acc = vec![0.0; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.cols];
        for i in 0..self.rows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &touched {
                triplets.push((i, j, acc[j]));
                acc[j] = 0.0;
                mark[j] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.rows, other.cols, triplets)
    }

    /// Places blocks into a larger matrix. `None` blocks are zero.
    pub fn block(blocks: &[Vec<Option<&SparseMatrix>>]) -> Result<Self> {
        let row_sizes: Vec<usize> = blocks
            .iter()
            .map(|brow| brow.iter().flatten().map(|b| b.rows).next().unwrap_or(0))
            .collect();
        let ncols = blocks.first().map_or(0, Vec::len);
        let col_sizes: Vec<usize> = (0..ncols)
            .map(|c| {
                blocks
                    .iter()
                    .filter_map(|brow| brow[c].map(|b| b.cols))
                    .next()
                    .unwrap_or(0)
            })
            .collect();
        let mut triplets = Vec::new();
        let mut row_off = 0;
        for (r, brow) in blocks.iter().enumerate() {
            let mut col_off = 0;
            for (c, blk) in brow.iter().enumerate() {
                if let Some(b) = blk {
                    check_len("block rows", row_sizes[r], b.rows)?;
                    check_len("block cols", col_sizes[c], b.cols)?;
                    triplets.extend(b.triplets().map(|(i, j, v)| (i + row_off, j + col_off, v)));
                }
                col_off += col_sizes[c];
            }
            row_off += row_sizes[r];
        }
        Self::from_triplets(row_off, col_sizes.iter().sum(), triplets)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Entries with `|i - j| <= 1`.
    pub fn tridiagonal_part(&self) -> Self {
        self.filtered(|i, j| i.abs_diff(j) <= 1)
    }

    pub fn diagonal_part(&self) -> Self {
        self.filtered(|i, j| i == j)
    }

    fn filtered(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        Self::from_triplets(
            self.rows,
            self.cols,
            self.triplets().filter(|&(i, j, _)| keep(i, j)),
        )
        .expect("filtering preserves validity")
    }

    /// Largest `|A_ij - A_ji|`; `None` when not square.
    pub fn asymmetry(&self) -> Option<f64> {
        if self.rows != self.cols {
            return None;
        }
        let t = self.transpose();
        let diff = self.linear_combination(1.0, &t, -1.0).ok()?;
        Some(diff.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            out[(i, j)] += v;
        }
        out
    }

    /// Half-bandwidth `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triplets(
            3,
            4,
            [(0, 0, 1.0), (0, 3, 2.0), (2, 1, -1.0), (1, 2, 4.0), (2, 1, 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn triplets_are_sorted_and_summed() {
        let a = sample();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(2, 1), -0.5);
        assert_eq!(a.row_ptr(), &[0, 2, 3, 4]);
    }

    #[test]
    fn cancelling_duplicates_are_dropped() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn matvec_and_transpose_agree_with_dense() {
        let a = sample();
        let x = [1.0, 2.0, 3.0, 4.0];
        let dense = a.to_dense();
        let y = a.mul_vec(&x);
        let expect = &dense * nalgebra::DVector::from_column_slice(&x);
        for i in 0..3 {
            assert_eq!(y[i], expect[i]);
        }
        let z = [1.0, -1.0, 2.0];
        assert_eq!(a.mul_transpose_vec(&z), a.transpose().mul_vec(&z));
        assert_eq!(a.transpose().to_dense(), dense.transpose());
    }

    #[test]
    fn product_matches_dense() {
        let a = sample();
        let p = a.transpose().matmul(&a).unwrap();
        let d = a.to_dense();
        assert_eq!(p.to_dense(), d.transpose() * &d);
    }

    #[test]
    fn malformed_csr_is_rejected() {
        assert!(SparseMatrix::from_csr(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, [(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn block_assembly() {
        let i2 = SparseMatrix::identity(2);
        let b = SparseMatrix::from_triplets(2, 1, [(1, 0, 3.0)]).unwrap();
        let bt = b.transpose().scaled(-1.0);
        let k = SparseMatrix::block(&[vec![Some(&i2), Some(&b)], vec![Some(&bt), None]]).unwrap();
        assert_eq!((k.rows(), k.cols()), (3, 3));
        assert_eq!(k.get(1, 2), 3.0);
        assert_eq!(k.get(2, 1), -3.0);
        assert_eq!(k.get(2, 2), 0.0);
    }

    #[test]
    fn tridiagonal_part_keeps_three_bands() {
        let a = SparseMatrix::from_dense(&DMatrix::from_fn(4, 4, |i, j| (i * 4 + j + 1) as f64))
            .unwrap();
        let t = a.tridiagonal_part();
        assert_eq!(t.nnz(), 10);
        assert_eq!(t.get(0, 2), 0.0);
        assert_eq!(t.get(2, 3), a.get(2, 3));
    }
}
