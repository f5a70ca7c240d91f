use gsts_core::linalg::{
    eigvals, max_principal_angle, null_space, numerical_rank, pinv, pseudo_spectral_radius,
    spd_solve, svd, symmetric_eigvals, DenseMatrix, LinearOperator, SparseCholesky, SparseMatrix,
};
use gsts_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn companion(roots: &[Complex64]) -> DenseMatrix {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * r;
        }
        coeffs = next;
    }
    let n = roots.len();
    let mut c = DenseMatrix::zeros(n, n);
    for j in 0..n {
        c[(0, j)] = -coeffs[j + 1].re;
    }
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    c
}

fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigvals_match_companion_roots(
        reals in prop::collection::vec(-3.0f64..3.0, 1..5),
        pair in (0.2f64..2.0, 0.3f64..2.0),
    ) {
        let mut roots: Vec<Complex64> = reals
            .iter()
            .enumerate()
            .map(|(k, r)| Complex64::new(r + 7.0 * k as f64, 0.0))
            .collect();
        roots.push(Complex64::new(pair.0, pair.1));
        roots.push(Complex64::new(pair.0, -pair.1));
        let mut got = eigvals(&companion(&roots)).unwrap();
        sort_complex(&mut roots);
        sort_complex(&mut got);
        for (a, b) in roots.iter().zip(&got) {
            prop_assert!((a - b).norm() < 1e-6 * (1.0 + a.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn pinv_satisfies_penrose(
        m in 2usize..7, n in 2usize..7, seed in 0u64..1000,
    ) {
        let k = m.min(n) - 1;
        let a = DenseMatrix::from_fn(m, k, |i, j| (((i * 13 + j * 7 + seed as usize) % 11) as f64 - 5.0) / 3.0)
            * DenseMatrix::from_fn(k, n, |i, j| (((i * 5 + j * 3 + 2 * seed as usize) % 7) as f64 - 3.0) / 2.0);
        let x = pinv(&a).unwrap();
        let scale = 1.0 + a.amax() * a.amax() * x.amax().max(1.0);
        prop_assert!((&a * &x * &a - &a).amax() < 1e-10 * scale);
        prop_assert!((&x * &a * &x - &x).amax() < 1e-10 * scale * x.amax().max(1.0));
        let ax = &a * &x;
        let xa = &x * &a;
        prop_assert!((&ax - ax.transpose()).amax() < 1e-10 * scale);
        prop_assert!((&xa - xa.transpose()).amax() < 1e-10 * scale);
    }

    #[test]
    fn sparse_products_match_dense(
        entries in prop::collection::vec((0usize..5, 0usize..4, -2.0f64..2.0), 0..15),
        x in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let a = SparseMatrix::from_triplets(5, 4, entries).unwrap();
        let d = a.to_dense();
        let y = a.mul_vec(&x);
        let yd = &d * gsts_core::linalg::dvec(&x);
        for (u, v) in y.iter().zip(yd.iter()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
        prop_assert_eq!(a.transpose().to_dense(), d.transpose());
        let ata = a.transpose().matmul(&a).unwrap().to_dense();
        prop_assert!((ata - d.transpose() * &d).amax() < 1e-12);
    }
}

#[test]
fn cholesky_names_failing_pivot() {
    let a = SparseMatrix::from_diagonal(&[1.0, 2.0, -1.0, 3.0]);
    match SparseCholesky::factor(&a) {
        Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 2),
        other => panic!("expected pivot error, got {other:?}"),
    }
}

#[test]
fn spd_solve_matches_dense_inverse() {
    let n = 12;
    let trip = (0..n).flat_map(|i| {
        let mut v = vec![(i, i, 4.0)];
        if i + 1 < n {
            v.push((i, i + 1, -1.0));
            v.push((i + 1, i, -1.0));
        }
        if i + 5 < n {
            v.push((i, i + 5, -0.5));
            v.push((i + 5, i, -0.5));
        }
        v
    });
    let a = SparseMatrix::from_triplets(n, n, trip).unwrap();
    let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let x = spd_solve(&a, &b).unwrap();
    let expect = a.to_dense().try_inverse().unwrap() * gsts_core::linalg::dvec(&b);
    for (u, v) in x.iter().zip(expect.iter()) {
        assert!((u - v).abs() < 1e-12);
    }
    let r = a.apply(&x);
    assert!(r.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
}

#[test]
fn rank_and_null_space() {
    let a = DenseMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 1.0, 0.0, 1.0]);
    assert_eq!(numerical_rank(&a).unwrap(), 2);
    let n = null_space(&a).unwrap();
    assert_eq!(n.ncols(), 1);
    assert!((&a * &n).amax() < 1e-12);
    let s = svd(&a).unwrap();
    assert!((s.reconstruct() - a).amax() < 1e-12);
}

#[test]
fn principal_angle_of_rotated_line() {
    let t = 0.3f64;
    let a = DenseMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
    let b = DenseMatrix::from_column_slice(3, 1, &[t.cos(), t.sin(), 0.0]);
    let angle = max_principal_angle(&a, &b).unwrap().unwrap();
    assert!((angle - t).abs() < 1e-12);
    let c = DenseMatrix::identity(3, 2);
    assert_eq!(max_principal_angle(&a, &c).unwrap(), None);
}

#[test]
fn pseudo_spectral_radius_skips_one() {
    let a = DenseMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, -0.25]));
    assert_eq!(pseudo_spectral_radius(&a, 1e-8).unwrap(), 0.5);
    let ev = symmetric_eigvals(&a).unwrap();
    assert_eq!(ev, vec![-0.25, 0.5, 1.0]);
}
