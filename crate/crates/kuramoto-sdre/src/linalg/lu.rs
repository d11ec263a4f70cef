//! LU factorization with partial pivoting and multi-RHS solve.

use super::{LinalgError, Matrix};

/// Solve `a · x = b` for a square `a` (n×n) and right-hand side `b` (n×k)
/// by Gaussian elimination with partial pivoting.
///
/// Fails with [`LinalgError::SingularMatrix`] when a pivot drops below
/// `1e-14 · ‖a‖_∞`.
pub fn lu_solve(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    assert!(a.is_square(), "lu_solve needs a square coefficient matrix");
    assert_eq!(a.rows(), b.rows(), "right-hand side row count mismatch");
    let n = a.rows();
    let k = b.cols();
    let pivot_floor = 1e-14 * a.inf_norm();

    // Augmented working copy [a | b], eliminated in place.
    let mut w = vec![0.0; n * (n + k)];
    let stride = n + k;
    for i in 0..n {
        w[i * stride..i * stride + n].copy_from_slice(a.row(i));
        w[i * stride + n..(i + 1) * stride].copy_from_slice(b.row(i));
    }

    for col in 0..n {
        // Partial pivot: largest magnitude in the column at or below the diagonal.
        let mut piv = col;
        let mut piv_mag = w[col * stride + col].abs();
        for r in col + 1..n {
            let mag = w[r * stride + col].abs();
            if mag > piv_mag {
                piv = r;
                piv_mag = mag;
            }
        }
        if piv_mag < pivot_floor || piv_mag == 0.0 {
            return Err(LinalgError::SingularMatrix);
        }
        if piv != col {
            for j in 0..stride {
                w.swap(col * stride + j, piv * stride + j);
            }
        }
        let inv_p = 1.0 / w[col * stride + col];
        for r in col + 1..n {
            let factor = w[r * stride + col] * inv_p;
            if factor == 0.0 {
                continue;
            }
            w[r * stride + col] = 0.0;
            for j in col + 1..stride {
                w[r * stride + j] -= factor * w[col * stride + j];
            }
        }
    }

    // Back substitution on the k augmented columns.
    let mut x = vec![0.0; n * k];
    for rhs in 0..k {
        for i in (0..n).rev() {
            let mut s = w[i * stride + n + rhs];
            for j in i + 1..n {
                s -= w[i * stride + j] * x[j * k + rhs];
            }
            x[i * k + rhs] = s / w[i * stride + i];
        }
    }
    Ok(Matrix::new(n, k, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let a = Matrix::identity(3);
        let b = Matrix::from_rows(&[vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]]);
        let x = lu_solve(&a, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_solve() {
        let a = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]);
        let x = lu_solve(&a, &b).unwrap();
        assert!((x.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((x.get(1, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn residual_on_well_conditioned_system() {
        // Deterministic pseudo-random 8×8 system, diagonally dominated so the
        // conditioning stays mild.
        let mut seq = 0.37_f64;
        let mut next = || {
            seq = (seq * 997.0 + 0.1234).fract();
            seq - 0.5
        };
        let mut a = Matrix::from_fn(8, 8, |_, _| next());
        for i in 0..8 {
            let v = a.get(i, i);
            a.set(i, i, v + 4.0);
        }
        let b = Matrix::from_fn(8, 3, |_, _| next());
        let x = lu_solve(&a, &b).unwrap();
        let resid = a.matmul(&x).sub(&b).frobenius_norm();
        assert!(resid <= 1e-9 * b.frobenius_norm().max(1.0), "residual {resid}");
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]);
        assert_eq!(lu_solve(&a, &b), Err(LinalgError::SingularMatrix));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let b = Matrix::from_rows(&[vec![2.0], vec![3.0]]);
        let x = lu_solve(&a, &b).unwrap();
        assert!((x.get(0, 0) - 3.0).abs() < 1e-15);
        assert!((x.get(1, 0) - 2.0).abs() < 1e-15);
    }
}
