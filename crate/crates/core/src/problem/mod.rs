//! Saddle-point systems `[[M, E], [−Eᵀ, 0]] (u₁, u₂) = (f₁, f₂)`, the MAC
//! Stokes generator and synthetic rank-deficient instances.

mod mtx;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::linalg::{norm, svd, DenseMatrix, LinearOperator, SparseCholesky, SparseMatrix};

pub use mtx::{
    load_system, read_manifest, read_matrix_market, read_vector, save_system,
    write_matrix_market, write_matrix_market_symmetric, write_vector, Manifest,
};

/// Relative least-squares residual below which `f` counts as lying in the
/// range of the block matrix.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Largest `p + q` for which [`SaddleSystem::validate`] runs its dense
/// consistency check.
pub const CONSISTENCY_CHECK_CAP: usize = 4000;

/// The block system `A u = f` with `A = [[M, E], [−Eᵀ, 0]]`.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    m: SparseMatrix,
    e: SparseMatrix,
    f1: Vec<f64>,
    f2: Vec<f64>,
}

impl SaddleSystem {
    /// Checks shapes only; see [`validate`](Self::validate) for the SPD and
    /// range conditions.
    pub fn new(m: SparseMatrix, e: SparseMatrix, f1: Vec<f64>, f2: Vec<f64>) -> Result<Self> {
        let p = m.rows();
        check_len("M must be square", p, m.cols())?;
        check_len("rows of E", p, e.rows())?;
        check_len("length of f1", p, f1.len())?;
        check_len("length of f2", e.cols(), f2.len())?;
        if e.cols() > p {
            return Err(Error::InvalidParameter(format!(
                "E is {}x{}; a saddle-point block needs q <= p",
                p,
                e.cols()
            )));
        }
        Ok(Self { m, e, f1, f2 })
    }

    pub fn m(&self) -> &SparseMatrix {
        &self.m
    }

    pub fn e(&self) -> &SparseMatrix {
        &self.e
    }

    pub fn f1(&self) -> &[f64] {
        &self.f1
    }

    pub fn f2(&self) -> &[f64] {
        &self.f2
    }

    pub fn p(&self) -> usize {
        self.m.rows()
    }

    pub fn q(&self) -> usize {
        self.e.cols()
    }

    pub fn n(&self) -> usize {
        self.p() + self.q()
    }

    /// Concatenated right-hand side `(f₁, f₂)`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut f = self.f1.clone();
        f.extend_from_slice(&self.f2);
        f
    }

    /// Same matrices, new right-hand side.
    pub fn with_rhs(&self, f1: Vec<f64>, f2: Vec<f64>) -> Result<Self> {
        Self::new(self.m.clone(), self.e.clone(), f1, f2)
    }

    /// Replaces the right-hand side by `A u_star`.
    pub fn with_solution(&self, u_star: &[f64]) -> Result<Self> {
        let (f1, f2) = rhs_from_solution(self, u_star)?;
        self.with_rhs(f1, f2)
    }

    /// Assembled block matrix `A`.
    pub fn block_matrix(&self) -> SparseMatrix {
        let neg_et = self.e.transpose().scaled(-1.0);
        SparseMatrix::block(&[
            vec![Some(&self.m), Some(&self.e)],
            vec![Some(&neg_et), None],
        ])
        .expect("block shapes agree by construction")
    }

    pub fn block_matrix_dense(&self) -> DenseMatrix {
        self.block_matrix().to_dense()
    }

    /// Runs the SPD check on `M` and, for systems up to
    /// [`CONSISTENCY_CHECK_CAP`], the range condition on `f`.
    pub fn validate(&self) -> Result<()> {
        SparseCholesky::factor(&self.m)?;
        if self.n() <= CONSISTENCY_CHECK_CAP {
            let res = self.consistency_residual()?;
            let scale = norm(&self.rhs());
            if res > CONSISTENCY_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter(format!(
                    "right-hand side is not in range(A): least-squares residual {res:e}"
                )));
            }
        }
        Ok(())
    }

    /// Least-squares residual of `A u = f`.
    ///
    /// `null(Aᵀ) = {(0, y) : E y = 0}` because `M` is nonsingular, so the
    /// residual is the norm of the projection of `f₂` onto `null(E)`.
    pub fn consistency_residual(&self) -> Result<f64> {
        let nullspace = svd(&self.e.to_dense())?.null_space();
        let proj = nullspace.transpose() * crate::linalg::dvec(&self.f2);
        Ok(proj.norm())
    }
}

impl LinearOperator for SaddleSystem {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let p = self.p();
        let (x1, x2) = x.split_at(p);
        let (y1, y2) = y.split_at_mut(p);
        self.m.mul_vec_into(x1, y1);
        let ex2 = self.e.mul_vec(x2);
        y1.iter_mut().zip(&ex2).for_each(|(a, b)| *a += b);
        let etx1 = self.e.mul_transpose_vec(x1);
        y2.iter_mut().zip(&etx1).for_each(|(a, b)| *a = -b);
    }
}

/// Right-hand side `f = A u_star`.
pub fn rhs_from_solution(sys: &SaddleSystem, u_star: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len("rhs_from_solution: u_star", sys.n(), u_star.len())?;
    let mut f = sys.apply(u_star);
    let f2 = f.split_off(sys.p());
    Ok((f, f2))
}

/// `u* = (1, 2, …, n)ᵀ`.
pub fn counting_solution(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64).collect()
}

/// Uniform `l × l` grid and viscosity for the lid-driven cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesConfig {
    pub l: usize,
    pub nu: f64,
}

impl StokesConfig {
    pub fn new(l: usize, nu: f64) -> Result<Self> {
        let cfg = Self { l, nu };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid size l = {} must be at least 2",
                self.l
            )));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive, got {}",
                self.nu
            )));
        }
        Ok(())
    }

    /// Velocity unknowns `2 l (l − 1)`.
    pub fn p(&self) -> usize {
        2 * self.l * (self.l - 1)
    }

    /// Pressure unknowns `l²`.
    pub fn q(&self) -> usize {
        self.l * self.l
    }

    pub fn h(&self) -> f64 {
        1.0 / self.l as f64
    }
}

/// Index helpers for the MAC unknown ordering: u-velocities, then
/// v-velocities, then pressures, each row-major by grid coordinate
/// (`x` fastest).
#[derive(Debug, Clone, Copy)]
pub struct MacLayout {
    pub l: usize,
}

impl MacLayout {
    /// u at `x = (i + 1) h`, `y = (j + ½) h`; `i < l − 1`, `j < l`.
    pub fn u(&self, i: usize, j: usize) -> usize {
        j * (self.l - 1) + i
    }

    /// v at `x = (i + ½) h`, `y = (j + 1) h`; `i < l`, `j < l − 1`.
    pub fn v(&self, i: usize, j: usize) -> usize {
        self.l * (self.l - 1) + j * self.l + i
    }

    /// Pressure in cell `(i, j)`.
    pub fn p(&self, i: usize, j: usize) -> usize {
        j * self.l + i
    }
}

/// MAC finite-difference discretization of the Stokes problem on the unit
/// square with lid-driven-cavity data (walls `x = 0`, `y = 0`, `x = 1` at
/// rest, `y = 1` moving with velocity `(1, 0)`).
///
/// `M = ν/h² · blockdiag(A₁, A₂)` holds the five-point velocity Laplacians
/// (tangential wall values enter through ghost points), `E` is the pressure
/// gradient `(p_east − p_west)/h` and `Eᵀ` the negative divergence. The
/// returned right-hand side carries the lid forcing.
pub fn assemble_mac_stokes(cfg: &StokesConfig) -> Result<SaddleSystem> {
    cfg.validate()?;
    let l = cfg.l;
    let lay = MacLayout { l };
    let (p, q) = (cfg.p(), cfg.q());
    let h = cfg.h();
    let visc = cfg.nu / (h * h);
    let mut m_trip = Vec::with_capacity(5 * p);
    let mut f1 = vec![0.0; p];

    // u-velocities: Dirichlet walls at x = 0, 1 lie on the grid; walls at
    // y = 0, 1 are half a cell away and use ghost values.
    for j in 0..l {
        for i in 0..l - 1 {
            let row = lay.u(i, j);
            let mut diag = 4.0;
            if i > 0 {
                m_trip.push((row, lay.u(i - 1, j), -visc));
            }
            if i + 1 < l - 1 {
                m_trip.push((row, lay.u(i + 1, j), -visc));
            }
            if j > 0 {
                m_trip.push((row, lay.u(i, j - 1), -visc));
            } else {
                diag += 1.0;
            }
            if j + 1 < l {
                m_trip.push((row, lay.u(i, j + 1), -visc));
            } else {
                diag += 1.0;
                // lid velocity 1 through the ghost value 2·1 − u
                f1[row] += 2.0 * visc;
            }
            m_trip.push((row, row, diag * visc));
        }
    }
    for j in 0..l - 1 {
        for i in 0..l {
            let row = lay.v(i, j);
            let mut diag = 4.0;
            if i > 0 {
                m_trip.push((row, lay.v(i - 1, j), -visc));
            } else {
                diag += 1.0;
            }
            if i + 1 < l {
                m_trip.push((row, lay.v(i + 1, j), -visc));
            } else {
                diag += 1.0;
            }
            if j > 0 {
                m_trip.push((row, lay.v(i, j - 1), -visc));
            }
            if j + 1 < l - 1 {
                m_trip.push((row, lay.v(i, j + 1), -visc));
            }
            m_trip.push((row, row, diag * visc));
        }
    }

    let inv_h = 1.0 / h;
    let mut e_trip = Vec::with_capacity(2 * p);
    for j in 0..l {
        for i in 0..l - 1 {
            let row = lay.u(i, j);
            e_trip.push((row, lay.p(i, j), -inv_h));
            e_trip.push((row, lay.p(i + 1, j), inv_h));
        }
    }
    for j in 0..l - 1 {
        for i in 0..l {
            let row = lay.v(i, j);
            e_trip.push((row, lay.p(i, j), -inv_h));
            e_trip.push((row, lay.p(i, j + 1), inv_h));
        }
    }

    let m = SparseMatrix::from_triplets(p, p, m_trip)?;
    let e = SparseMatrix::from_triplets(p, q, e_trip)?;
    SaddleSystem::new(m, e, f1, vec![0.0; q])
}

/// MAC system with the right-hand side replaced so that the exact solution is
/// `u* = (1, 2, …, 3l² − 2l)ᵀ`.
pub fn mac_stokes_benchmark(cfg: &StokesConfig) -> Result<SaddleSystem> {
    let sys = assemble_mac_stokes(cfg)?;
    sys.with_solution(&counting_solution(sys.n()))
}

/// `A = A_H + A_S` with `A_H = blockdiag(M, 0)` and `A_S = [[0, E], [−Eᵀ, 0]]`.
#[derive(Debug, Clone)]
pub struct HermitianSplit {
    pub a_h: SparseMatrix,
    pub a_s: SparseMatrix,
}

pub fn split_hermitian(sys: &SaddleSystem) -> HermitianSplit {
    let neg_et = sys.e().transpose().scaled(-1.0);
    let zq = SparseMatrix::zeros(sys.q(), sys.q());
    let zp = SparseMatrix::zeros(sys.p(), sys.p());
    let a_h = SparseMatrix::block(&[vec![Some(sys.m()), None], vec![None, Some(&zq)]])
        .expect("block shapes agree");
    let a_s = SparseMatrix::block(&[vec![Some(&zp), Some(sys.e())], vec![Some(&neg_et), None]])
        .expect("block shapes agree");
    HermitianSplit { a_h, a_s }
}

/// Random consistent saddle-point system with `rank(E) = rank` exactly
/// (E is a product of `p × rank` and `rank × q` factors).
pub fn random_rank_deficient(p: usize, q: usize, rank: usize, seed: u64) -> Result<SaddleSystem> {
    if q > p || rank > q || rank == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < rank <= q <= p, got p={p} q={q} rank={rank}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DenseMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let m = x.transpose() * &x / p as f64 + DenseMatrix::identity(p, p);
    let left = DenseMatrix::from_fn(p, rank, |_, _| rng.random_range(-1.0..1.0));
    let right = DenseMatrix::from_fn(rank, q, |_, _| rng.random_range(-1.0..1.0));
    let e = left * right;
    let u_star: Vec<f64> = (0..p + q).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sys = SaddleSystem::new(
        SparseMatrix::from_dense(&m)?,
        SparseMatrix::from_dense(&e)?,
        vec![0.0; p],
        vec![0.0; q],
    )?;
    sys.with_solution(&u_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvals, numerical_rank, symmetric_eigvals};

    #[test]
    fn dimensions_follow_grid() {
        for l in 2..6 {
            let cfg = StokesConfig::new(l, 1.0).unwrap();
            let sys = assemble_mac_stokes(&cfg).unwrap();
            assert_eq!(sys.p(), 2 * l * (l - 1));
            assert_eq!(sys.q(), l * l);
        }
    }

    #[test]
    fn small_grid_rejected() {
        assert!(StokesConfig::new(1, 1.0).is_err());
        assert!(StokesConfig::new(4, 0.0).is_err());
    }

    #[test]
    fn l2_rank_and_constant_pressure_mode() {
        let sys = assemble_mac_stokes(&StokesConfig::new(2, 1.0).unwrap()).unwrap();
        assert_eq!(numerical_rank(&sys.e().to_dense()).unwrap(), 3);
        let ones = vec![1.0; sys.q()];
        assert!(norm(&sys.e().mul_vec(&ones)) <= 1e-10 * sys.e().frobenius_norm());
    }

    #[test]
    fn m_is_symmetric_positive_definite() {
        let sys = assemble_mac_stokes(&StokesConfig::new(4, 0.01).unwrap()).unwrap();
        assert_eq!(sys.m().asymmetry(), Some(0.0));
        let ev = symmetric_eigvals(&sys.m().to_dense()).unwrap();
        assert!(ev[0] > 0.0);
    }

    #[test]
    fn lid_forcing_only_on_top_row() {
        let cfg = StokesConfig::new(3, 1.0).unwrap();
        let sys = assemble_mac_stokes(&cfg).unwrap();
        let lay = MacLayout { l: 3 };
        let nz: Vec<usize> = (0..sys.p()).filter(|&i| sys.f1()[i] != 0.0).collect();
        assert_eq!(nz, vec![lay.u(0, 2), lay.u(1, 2)]);
        assert!(sys.f2().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_solution_gives_zero_rhs() {
        let sys = assemble_mac_stokes(&StokesConfig::new(3, 1.0).unwrap()).unwrap();
        let (f1, f2) = rhs_from_solution(&sys, &vec![0.0; sys.n()]).unwrap();
        assert!(f1.iter().chain(&f2).all(|&v| v == 0.0));
        assert!(rhs_from_solution(&sys, &[1.0]).is_err());
    }

    #[test]
    fn hermitian_split_identities() {
        let sys = assemble_mac_stokes(&StokesConfig::new(2, 1.0).unwrap()).unwrap();
        let split = split_hermitian(&sys);
        let a = sys.block_matrix();
        let sum = split.a_h.linear_combination(1.0, &split.a_s, 1.0).unwrap();
        assert_eq!(sum, a);
        assert_eq!(split.a_h.asymmetry(), Some(0.0));
        let at = split.a_s.transpose().scaled(-1.0);
        assert_eq!(at, split.a_s);
        let zero_eigs = symmetric_eigvals(&split.a_h.to_dense())
            .unwrap()
            .iter()
            .filter(|v| v.abs() < 1e-12)
            .count();
        assert_eq!(zero_eigs, sys.q());
        for z in eigvals(&split.a_s.to_dense()).unwrap() {
            assert!(z.re.abs() < 1e-10 * split.a_s.frobenius_norm());
        }
    }

    #[test]
    fn benchmark_rhs_is_consistent() {
        let sys = mac_stokes_benchmark(&StokesConfig::new(4, 0.01).unwrap()).unwrap();
        sys.validate().unwrap();
        let mut bad = sys.f2().to_vec();
        bad.iter_mut().for_each(|v| *v += 1.0);
        let broken = sys.with_rhs(sys.f1().to_vec(), bad).unwrap();
        assert!(broken.validate().is_err());
    }

    #[test]
    fn random_systems_have_forced_rank() {
        let sys = random_rank_deficient(10, 6, 4, 7).unwrap();
        assert_eq!(numerical_rank(&sys.e().to_dense()).unwrap(), 4);
        sys.validate().unwrap();
    }
}
