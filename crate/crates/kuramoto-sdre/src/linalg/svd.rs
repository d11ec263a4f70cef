//! Singular value decomposition by one-sided Jacobi rotations, with the
//! Moore–Penrose pseudoinverse and numerical rank built on top of it.
//!
//! One-sided Jacobi orthogonalizes the columns of the input by plane
//! rotations; converged column norms are the singular values. It is slower
//! than bidiagonalization-based methods but simple, unconditionally stable
//! and highly accurate, which is the right trade at the matrix sizes used
//! here.

use super::{LinalgError, Matrix, Vector};

/// Result of [`svd`]: `M = U · Σ · Vᵀ` with `U` (m×m) and `V` (n×n)
/// orthogonal and the singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    /// Length `min(m, n)`, descending, nonnegative.
    pub singular_values: Vector,
    pub vt: Matrix,
}

impl SvdResult {
    /// `U · Σ · Vᵀ`, for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix {
        let m = self.u.rows();
        let n = self.vt.cols();
        let k = self.singular_values.len();
        Matrix::from_fn(m, n, |i, j| {
            (0..k)
                .map(|r| self.u.get(i, r) * self.singular_values.get(r) * self.vt.get(r, j))
                .sum()
        })
    }
}

const JACOBI_EPS: f64 = 1e-15;

/// Singular value decomposition. The sweep budget is `100 · max(m, n)`;
/// exceeding it yields [`LinalgError::NoConvergence`].
pub fn svd(m: &Matrix) -> Result<SvdResult, LinalgError> {
    if m.rows() < m.cols() {
        // Jacobi wants at least as many rows as columns; factor the
        // transpose and swap the roles of U and V.
        let t = svd(&m.transpose())?;
        return Ok(SvdResult {
            u: t.vt.transpose(),
            singular_values: t.singular_values,
            vt: t.u.transpose(),
        });
    }

    let (rows, cols) = (m.rows(), m.cols());
    // Column-major working copies: `w` holds the rotated columns of M,
    // `v` accumulates the right rotations (starts as I).
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| m.col(j).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let sweep_cap = 100 * rows.max(cols);
    let mut converged = false;
    for _ in 0..sweep_cap {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut app, mut aqq, mut apq) = (0.0, 0.0, 0.0);
                for (&wp, &wq) in w[p].iter().zip(&w[q]) {
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                if apq.abs() <= JACOBI_EPS * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence);
    }

    // Column norms are the singular values; sort descending (stable, so
    // equal values keep their relative order and the output is deterministic).
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = w.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));

    let singular_values = Vector::new(order.iter().map(|&j| norms[j]).collect());

    // Left vectors: normalized rotated columns where σ > 0; the remainder of
    // the m×m basis (σ = 0 columns and rows beyond n) is completed below.
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(rows);
    for &j in &order {
        if norms[j] > 0.0 {
            u_cols.push(w[j].iter().map(|x| x / norms[j]).collect());
        }
    }
    complete_orthonormal_basis(&mut u_cols, rows);

    let u = Matrix::from_fn(rows, rows, |i, j| u_cols[j][i]);
    let vt = Matrix::from_fn(cols, cols, |i, j| v[order[i]][j]);
    Ok(SvdResult { u, singular_values, vt })
}

/// Apply the plane rotation `(c, s)` to columns `p < q` in place.
fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    for (xp, xq) in head[p].iter_mut().zip(tail[0].iter_mut()) {
        let (a, b) = (*xp, *xq);
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

/// Extend a set of orthonormal columns to a full orthonormal basis of ℝ^m
/// using modified Gram–Schmidt (applied twice for orthogonality) over the
/// standard basis vectors.
fn complete_orthonormal_basis(cols: &mut Vec<Vec<f64>>, m: usize) {
    for cand in 0..m {
        if cols.len() == m {
            break;
        }
        let mut e = vec![0.0; m];
        e[cand] = 1.0;
        for _ in 0..2 {
            for c in cols.iter() {
                let proj: f64 = c.iter().zip(&e).map(|(a, b)| a * b).sum();
                for i in 0..m {
                    e[i] -= proj * c[i];
                }
            }
        }
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for x in e.iter_mut() {
                *x /= norm;
            }
            cols.push(e);
        }
    }
    assert_eq!(cols.len(), m, "orthonormal basis completion fell short");
}

fn default_tol(m: &Matrix, sigma_max: f64) -> f64 {
    m.rows().max(m.cols()) as f64 * sigma_max * 1e-12
}

/// Moore–Penrose pseudoinverse via the SVD. Singular values at or below
/// `tol` are treated as zero; when `tol` is `None` it defaults to
/// `max(rows, cols) · σ_max · 1e-12`.
pub fn pinv(m: &Matrix, tol: Option<f64>) -> Result<Matrix, LinalgError> {
    let dec = svd(m)?;
    let sigma_max = dec.singular_values.get(0);
    let cut = tol.unwrap_or_else(|| default_tol(m, sigma_max));
    assert!(cut >= 0.0, "pseudoinverse tolerance must be nonnegative");
    let k = dec.singular_values.len();
    let inv_sigma: Vec<f64> = (0..k)
        .map(|i| {
            let s = dec.singular_values.get(i);
            if s > cut {
                1.0 / s
            } else {
                0.0
            }
        })
        .collect();
    // M⁺ = V · Σ⁺ · Uᵀ
    Ok(Matrix::from_fn(m.cols(), m.rows(), |i, j| {
        (0..k).map(|r| dec.vt.get(r, i) * inv_sigma[r] * dec.u.get(j, r)).sum()
    }))
}

/// Number of singular values above `tol` (same default as [`pinv`]).
pub fn numerical_rank(m: &Matrix, tol: Option<f64>) -> Result<usize, LinalgError> {
    let dec = svd(m)?;
    let sigma_max = dec.singular_values.get(0);
    let cut = tol.unwrap_or_else(|| default_tol(m, sigma_max));
    Ok((0..dec.singular_values.len())
        .filter(|&i| dec.singular_values.get(i) > cut)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_defect(m: &Matrix) -> f64 {
        m.transpose().matmul(m).sub(&Matrix::identity(m.cols())).frobenius_norm()
    }

    // Small deterministic value sequence for "random" test matrices.
    fn pseudo_random(n: usize, seed: f64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = (s * 997.0 + 0.127).fract();
                2.0 * s - 1.0
            })
            .collect()
    }

    #[test]
    fn diagonal_matrix() {
        let m = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]);
        let dec = svd(&m).unwrap();
        assert!((dec.singular_values.get(0) - 3.0).abs() < 1e-12);
        assert!((dec.singular_values.get(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let m = Matrix::zeros(2, 3);
        let dec = svd(&m).unwrap();
        assert_eq!(dec.singular_values.len(), 2);
        assert_eq!(dec.singular_values.get(0), 0.0);
        assert_eq!(dec.singular_values.get(1), 0.0);
        // U and V must still be genuine orthogonal bases.
        assert!(orthogonality_defect(&dec.u) < 1e-12);
        assert!(orthogonality_defect(&dec.vt) < 1e-12);
    }

    #[test]
    fn reconstruction_5x3() {
        let m = Matrix::new(5, 3, pseudo_random(15, 0.3));
        let dec = svd(&m).unwrap();
        let err = dec.reconstruct().sub(&m).frobenius_norm();
        assert!(err <= 1e-9 * m.frobenius_norm().max(1.0), "reconstruction error {err}");
        assert!(orthogonality_defect(&dec.u) <= 1e-10 * 5.0);
        assert!(orthogonality_defect(&dec.vt) <= 1e-10 * 3.0);
    }

    #[test]
    fn wide_matrix_reconstruction() {
        let m = Matrix::new(3, 7, pseudo_random(21, 0.61));
        let dec = svd(&m).unwrap();
        assert_eq!(dec.u.rows(), 3);
        assert_eq!(dec.vt.rows(), 7);
        assert_eq!(dec.singular_values.len(), 3);
        let err = dec.reconstruct().sub(&m).frobenius_norm();
        assert!(err <= 1e-9 * m.frobenius_norm().max(1.0));
    }

    #[test]
    fn pinv_identity() {
        let p = pinv(&Matrix::identity(4), None).unwrap();
        assert!(p.sub(&Matrix::identity(4)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn pinv_rank_one_diagonal() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let p = pinv(&m, None).unwrap();
        assert!(p.sub(&m).frobenius_norm() < 1e-12);
    }

    #[test]
    fn pinv_penrose_conditions() {
        let m = Matrix::new(3, 4, pseudo_random(12, 0.77));
        let p = pinv(&m, None).unwrap();
        let tol = 1e-8 * m.frobenius_norm().max(1.0);
        let mpm = m.matmul(&p).matmul(&m);
        let pmp = p.matmul(&m).matmul(&p);
        let mp = m.matmul(&p);
        let pm = p.matmul(&m);
        assert!(mpm.sub(&m).frobenius_norm() < tol);
        assert!(pmp.sub(&p).frobenius_norm() < tol);
        assert!(mp.sub(&mp.transpose()).frobenius_norm() < tol);
        assert!(pm.sub(&pm.transpose()).frobenius_norm() < tol);
    }

    #[test]
    fn rank_cases() {
        assert_eq!(numerical_rank(&Matrix::identity(5), None).unwrap(), 5);
        assert_eq!(numerical_rank(&Matrix::zeros(3, 3), None).unwrap(), 0);
        // Outer product of two vectors has rank one.
        let a = pseudo_random(4, 0.11);
        let b = pseudo_random(4, 0.53);
        let outer = Matrix::from_fn(4, 4, |i, j| a[i] * b[j]);
        assert_eq!(numerical_rank(&outer, None).unwrap(), 1);
    }
}
