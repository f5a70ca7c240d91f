use gsts_core::linalg::{pinv, DenseMatrix, LinearOperator};
use gsts_core::problem::{mac_stokes_benchmark, random_rank_deficient, SaddleSystem, StokesConfig};
use gsts_core::splitting::{
    block_diagonal_dense, build_b, materialize_hss, nullspace_mismatch, schur_complement_dense,
    triangular_parts, BChoice, ConstraintPreconditioner, GstsParams, GstsPreconditioner,
    HssPreconditioner, PChoice,
};
use gsts_core::Error;

fn stokes(l: usize, nu: f64) -> SaddleSystem {
    mac_stokes_benchmark(&StokesConfig::new(l, nu).unwrap()).unwrap()
}

fn operator_matrix(op: &dyn LinearOperator) -> DenseMatrix {
    let n = op.dim();
    let mut out = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        out.column_mut(j).copy_from_slice(&op.apply(&e));
        e[j] = 0.0;
    }
    out
}

fn triple_product(sys: &SaddleSystem, choice: &BChoice, params: GstsParams) -> DenseMatrix {
    let b = build_b(sys, choice, params.tau).unwrap();
    let bc = block_diagonal_dense(sys, &b).unwrap();
    let (kl, ku) = triangular_parts(sys);
    let left = &bc + kl.to_dense() * params.omega1;
    let right = &bc + ku.to_dense() * params.omega2;
    left * pinv(&bc).unwrap() * right
}

#[test]
fn block_form_equals_triple_product_both_regimes() {
    for (sys, choice) in [
        (stokes(2, 1.0), BChoice::SchurExact),
        (stokes(3, 0.01), BChoice::ShiftedTridiag),
        (random_rank_deficient(9, 6, 4, 5).unwrap(), BChoice::ShiftedDiag),
    ] {
        let params = GstsParams::new(0.7, 1.3, 0.9).unwrap();
        let pre = GstsPreconditioner::build(&sys, &choice, params).unwrap();
        let b_omega = pre.materialize_b_omega().unwrap();
        let expect = triple_product(&sys, &choice, params);
        assert!((b_omega - &expect).amax() < 1e-10 * expect.amax());
    }
}

#[test]
fn nonsingular_operator_is_inverse() {
    let sys = stokes(3, 0.1);
    let pre = GstsPreconditioner::build(&sys, &BChoice::ShiftedDiag, GstsParams::new(1.0, 0.5, 1.0).unwrap())
        .unwrap();
    let x = operator_matrix(&pre);
    let b = pre.materialize_b_omega().unwrap();
    let id = DenseMatrix::identity(sys.n(), sys.n());
    assert!((&x * &b - &id).amax() < 1e-10);
}

#[test]
fn singular_operator_is_moore_penrose_inverse() {
    let sys = stokes(2, 1.0);
    let pre = GstsPreconditioner::build(&sys, &BChoice::SchurExact, GstsParams::new(0.8, 0.6, 1.0).unwrap())
        .unwrap();
    let x = operator_matrix(&pre);
    let a = pre.materialize_b_omega().unwrap();
    let ax = &a * &x;
    let xa = &x * &a;
    assert!((&ax * &a - &a).amax() < 1e-9);
    assert!((&xa * &x - &x).amax() < 1e-9);
    assert!((&ax - ax.transpose()).amax() < 1e-9);
    assert!((&xa - xa.transpose()).amax() < 1e-9);
    assert!((x - pinv(&a).unwrap()).amax() < 1e-9);
}

#[test]
fn singular_b_with_wrong_null_space_fails_fast() {
    let sys = stokes(2, 1.0);
    let mut b = schur_complement_dense(&sys).unwrap();
    b[(0, 0)] += 1.0;
    let mut bad = DenseMatrix::zeros(sys.q(), sys.q());
    bad[(0, 0)] = 1.0;
    assert!(nullspace_mismatch(&sys, &bad).unwrap() > 1e-3);
    assert!(matches!(
        build_b(&sys, &BChoice::CustomSingular(bad), 1.0),
        Err(Error::NullSpaceCondition { .. })
    ));
    assert!(build_b(&sys, &BChoice::CustomSingular(b), 1.0).is_err());
}

#[test]
fn gsor_b_carries_tau_over_nu() {
    let sys = stokes(3, 1.0);
    let base = build_b(&sys, &BChoice::ShiftedDiag, 1.0).unwrap().to_dense();
    let scaled = build_b(&sys, &BChoice::GsorDiag { nu_g: 2.0 }, 0.5).unwrap().to_dense();
    assert!((base * 0.25 - scaled).amax() < 1e-14);
}

#[test]
fn hss_and_constraint_match_dense_inverses() {
    let sys = stokes(3, 0.01);
    let hss = HssPreconditioner::new(&sys, 0.3).unwrap();
    let ph = materialize_hss(&sys, 0.3).unwrap();
    let id = DenseMatrix::identity(sys.n(), sys.n());
    assert!((operator_matrix(&hss) * ph - &id).amax() < 1e-9);
    for pc in [PChoice::Diagonal, PChoice::Tridiagonal] {
        let cp = ConstraintPreconditioner::new(&sys, pc).unwrap();
        let dense = cp.materialize().unwrap();
        assert!((operator_matrix(&cp) * dense - &id).amax() < 1e-9);
    }
}
