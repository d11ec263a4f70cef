//! Continuous-time algebraic Riccati equation solver and the Kalman
//! controllability-rank diagnostic.
//!
//! Solves `AᵀP + PA − P B R⁻¹ Bᵀ P + Q = 0` for the stabilizing `P ⪰ 0`
//! with the structure-preserving doubling algorithm (SDA): Cayley-transform
//! the Hamiltonian pencil into standard symplectic form and square the
//! pencil until the iterate stalls. Doubling converges quadratically and
//! only needs LU solves, which keeps this crate free of any eigensolver.

use crate::linalg::{cholesky, lu_solve, numerical_rank, LinalgError, Matrix};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RiccatiError {
    /// The doubling iteration diverged or the residual check failed: the
    /// `(A, B)` pair admits no stabilizing solution at this state.
    NotStabilizable,
    /// `Q`/`R` violate the symmetry or definiteness requirements.
    BadWeights,
}

impl fmt::Display for RiccatiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiccatiError::NotStabilizable => {
                write!(f, "no stabilizing Riccati solution for this (A, B) pair")
            }
            RiccatiError::BadWeights => write!(f, "Q must be symmetric PSD and R symmetric PD"),
        }
    }
}

impl std::error::Error for RiccatiError {}

/// A continuous-time algebraic Riccati problem.
///
/// `q` must be symmetric positive semidefinite and `r` symmetric positive
/// definite; both are checked at construction (`r` via Cholesky).
#[derive(Debug, Clone)]
pub struct CareProblem {
    a: Matrix,
    b: Matrix,
    q: Matrix,
    r: Matrix,
}

fn is_symmetric(m: &Matrix) -> bool {
    m.is_square() && m.sub(&m.transpose()).frobenius_norm() <= 1e-10 * m.frobenius_norm().max(0.0)
}

impl CareProblem {
    pub fn new(a: Matrix, b: Matrix, q: Matrix, r: Matrix) -> Result<Self, RiccatiError> {
        let n = a.rows();
        let m = b.cols();
        assert!(a.is_square(), "A must be square");
        assert_eq!(b.rows(), n, "B row count must match A");
        assert_eq!((q.rows(), q.cols()), (n, n), "Q must be n×n");
        assert_eq!((r.rows(), r.cols()), (m, m), "R must be m×m");
        if !is_symmetric(&q) || !is_symmetric(&r) || cholesky(&r).is_none() {
            return Err(RiccatiError::BadWeights);
        }
        Ok(CareProblem { a, b, q, r })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn q(&self) -> &Matrix {
        &self.q
    }
    pub fn r(&self) -> &Matrix {
        &self.r
    }
}

/// Stabilizing solution of a [`CareProblem`].
#[derive(Debug, Clone)]
pub struct CareSolution {
    pub p: Matrix,
    /// `‖AᵀP + PA − P B R⁻¹ Bᵀ P + Q‖_F`, recomputed from the returned `p`.
    pub residual_norm: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 100;
const DIVERGENCE_NORM: f64 = 1e12;
const STALL_RTOL: f64 = 1e-12;

/// Solve the CARE by structure-preserving doubling.
///
/// The Cayley parameter starts at `γ = max(1, ‖A‖_F)` and is bumped by
/// ×1.27 (a handful of times) whenever `A − γI` or the transformed pencil
/// is singular at that exact γ, which happens when γ hits an eigenvalue
/// of `A`.
pub fn solve_care(prob: &CareProblem) -> Result<CareSolution, RiccatiError> {
    let n = prob.a.rows();
    let eye = Matrix::identity(n);

    // G = B R⁻¹ Bᵀ (symmetric PSD).
    let rinv_bt = lu_solve(&prob.r, &prob.b.transpose()).map_err(|_| RiccatiError::BadWeights)?;
    let g = prob.b.matmul(&rinv_bt).symmetrize();

    let gamma_base = prob.a.frobenius_norm().max(1.0);
    let mut init = None;
    for attempt in 0..8 {
        let gamma = gamma_base * 1.27_f64.powi(attempt);
        if let Ok(state) = doubling_init(&prob.a, &g, &prob.q, gamma, &eye) {
            init = Some(state);
            break;
        }
    }
    let (mut e, mut gk, mut hk) = init.ok_or(RiccatiError::NotStabilizable)?;

    let mut iterations = 0;
    for k in 0..MAX_ITER {
        iterations = k + 1;
        // Pencil squaring:
        //   E ← E (I + G H)⁻¹ E
        //   G ← G + E (I + G H)⁻¹ G Eᵀ
        //   H ← H + Eᵀ H (I + G H)⁻¹ E
        // I + G H has spectrum ≥ 1 for PSD G, H, so the solve is safe.
        let m = eye.add(&gk.matmul(&hk));
        let s1 = lu_solve(&m, &e).map_err(|_| RiccatiError::NotStabilizable)?;
        let s2 = lu_solve(&m, &gk.matmul(&e.transpose())).map_err(|_| RiccatiError::NotStabilizable)?;
        let e_next = e.matmul(&s1);
        let g_next = gk.add(&e.matmul(&s2)).symmetrize();
        let h_next = hk.add(&e.transpose().matmul(&hk.matmul(&s1))).symmetrize();

        let dh = h_next.sub(&hk).frobenius_norm();
        e = e_next;
        gk = g_next;
        hk = h_next;

        if !hk.is_finite() || hk.frobenius_norm() > DIVERGENCE_NORM || gk.frobenius_norm() > DIVERGENCE_NORM {
            return Err(RiccatiError::NotStabilizable);
        }
        if dh <= STALL_RTOL * hk.frobenius_norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }

    let p = hk;
    let residual_norm = care_residual(prob, &p).map_err(|_| RiccatiError::NotStabilizable)?;
    if !residual_norm.is_finite() || residual_norm > 1e-8 * p.frobenius_norm().max(1.0) {
        return Err(RiccatiError::NotStabilizable);
    }
    Ok(CareSolution { p, residual_norm, iterations })
}

/// Initial pencil in standard symplectic form for Cayley parameter γ:
/// with `A_γ = A − γI` and `W = A_γ + G A_γ⁻ᵀ Q`,
///   E₀ = I + 2γ W⁻¹
///   G₀ = 2γ W⁻¹ G A_γ⁻ᵀ
///   H₀ = 2γ W⁻ᵀ Q A_γ⁻¹
fn doubling_init(
    a: &Matrix,
    g: &Matrix,
    q: &Matrix,
    gamma: f64,
    eye: &Matrix,
) -> Result<(Matrix, Matrix, Matrix), LinalgError> {
    let a_gamma = a.sub(&eye.scale(gamma));
    let t1 = lu_solve(&a_gamma.transpose(), q)?; // A_γ⁻ᵀ Q
    let w = a_gamma.add(&g.matmul(&t1));
    let m1 = lu_solve(&w, &eye.scale(2.0 * gamma))?; // 2γ W⁻¹
    let e0 = eye.add(&m1);
    let t2 = lu_solve(&a_gamma, g)?; // A_γ⁻¹ G
    let g0 = m1.matmul(&t2.transpose()).symmetrize();
    let h0 = lu_solve(&w.transpose(), &t1.transpose().scale(2.0 * gamma))?.symmetrize();
    if e0.is_finite() && g0.is_finite() && h0.is_finite() {
        Ok((e0, g0, h0))
    } else {
        Err(LinalgError::SingularMatrix)
    }
}

/// `‖AᵀP + PA − P B R⁻¹ Bᵀ P + Q‖_F`.
pub fn care_residual(prob: &CareProblem, p: &Matrix) -> Result<f64, LinalgError> {
    let at_p = prob.a.transpose().matmul(p);
    let bt_p = prob.b.transpose().matmul(p);
    let rinv_bt_p = lu_solve(&prob.r, &bt_p)?;
    let quad = bt_p.transpose().matmul(&rinv_bt_p);
    Ok(at_p.add(&at_p.transpose()).sub(&quad).add(&prob.q).frobenius_norm())
}

/// Rank of the Kalman controllability matrix `[B, AB, …, Aⁿ⁻¹B]`,
/// computed as its numerical rank at the default SVD tolerance. The pair
/// is fully controllable iff the result equals `n`.
pub fn controllability_rank(a: &Matrix, b: &Matrix) -> Result<usize, LinalgError> {
    assert!(a.is_square(), "A must be square");
    assert_eq!(a.rows(), b.rows(), "B row count must match A");
    let n = a.rows();
    let m = b.cols();
    let mut kalman = Matrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..m {
                kalman.set(i, k * m + j, block.get(i, j));
            }
        }
        if k + 1 < n {
            block = a.matmul(&block);
        }
    }
    numerical_rank(&kalman, None)
}
