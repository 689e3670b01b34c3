//! Symmetric positive-definite solves used by the regularization solvers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolver {
    /// Dense Cholesky factorization.
    #[default]
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

/// Solves `m x = b` for SPD `m`. Returns `None` if `m` is not numerically
/// positive definite (or CG breaks down).
pub(crate) fn solve_spd(
    m: DMatrix<f64>,
    b: &DVector<f64>,
    method: LinearSolver,
    cg_tol: f64,
    x0: Option<&DVector<f64>>,
) -> Option<DVector<f64>> {
    match method {
        LinearSolver::Cholesky => m.cholesky().map(|c| c.solve(b)),
        LinearSolver::ConjugateGradient => pcg(&m, b, cg_tol, x0),
    }
}

/// Preconditioned CG with the diagonal of `m` as preconditioner. Stops when
/// `||r|| <= tol * ||b||`.
pub(crate) fn pcg(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: f64,
    x0: Option<&DVector<f64>>,
) -> Option<DVector<f64>> {
    let n = b.len();
    let diag = m.diagonal();
    if diag.iter().any(|&d| d <= 0.0) {
        return None;
    }
    let inv_diag = diag.map(|d| 1.0 / d);
    let b_norm = b.norm();
    let mut x = x0.cloned().unwrap_or_else(|| DVector::zeros(n));
    if b_norm == 0.0 {
        return Some(DVector::zeros(n));
    }
    let mut r = b - m * &x;
    let mut z = r.component_mul(&inv_diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for _ in 0..(10 * n).max(100) {
        if r.norm() <= tol * b_norm {
            return Some(x);
        }
        let mp = m * &p;
        let curvature = p.dot(&mp);
        if curvature <= 0.0 {
            return None;
        }
        let step = rz / curvature;
        x.axpy(step, &p, 1.0);
        r.axpy(-step, &mp, 1.0);
        z = r.component_mul(&inv_diag);
        let rz_next = r.dot(&z);
        p = &z + &p * (rz_next / rz);
        rz = rz_next;
    }
    (r.norm() <= tol.sqrt() * b_norm).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        a.transpose() * &a + DMatrix::identity(n, n) * 0.1
    }

    #[test]
    fn cholesky_and_cg_agree() {
        let m = random_spd(40, 1);
        let b = DVector::from_fn(40, |i, _| (i as f64).sin());
        let x1 = solve_spd(m.clone(), &b, LinearSolver::Cholesky, 1e-12, None).unwrap();
        let x2 = solve_spd(m.clone(), &b, LinearSolver::ConjugateGradient, 1e-13, None).unwrap();
        assert!((&x1 - &x2).norm() <= 1e-8 * x1.norm());
        assert!((&m * &x1 - &b).norm() <= 1e-10 * b.norm());
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut m = DMatrix::identity(3, 3);
        m[(1, 1)] = -1.0;
        let b = DVector::from_element(3, 1.0);
        assert!(solve_spd(m.clone(), &b, LinearSolver::Cholesky, 1e-12, None).is_none());
        assert!(solve_spd(m, &b, LinearSolver::ConjugateGradient, 1e-12, None).is_none());
    }

    #[test]
    fn cg_zero_rhs() {
        let m = random_spd(5, 2);
        let x = pcg(&m, &DVector::zeros(5), 1e-12, None).unwrap();
        assert_eq!(x.norm(), 0.0);
    }
}
