//! Small dense linear-algebra kernels shared by the basis and operator code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Gram matrices with a condition estimate above this are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e14;

/// Ratio of extreme eigenvalues of a symmetric positive semidefinite matrix.
pub fn condition_estimate(gram: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Modified Gram–Schmidt with one reorthogonalization pass, carried out on
/// coefficient vectors under the inner product `⟨a, b⟩ = aᵀ G b`.
///
/// Column `j` of the result holds the coefficients of the `j`-th orthonormal
/// function in the original basis, so `Qᵀ G Q = I` and `Q` is upper
/// triangular.
pub fn gram_schmidt(gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::InvalidArgument("Gram matrix must be square".into()));
    }
    let condition = condition_estimate(gram);
    if !(condition <= MAX_GRAM_CONDITION) {
        return Err(Error::IllConditionedBasis { condition });
    }

    let mut q = DMatrix::<f64>::zeros(n, n);
    // G q_i, kept so each projection costs O(n)
    let mut gq = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut v = DVector::<f64>::zeros(n);
        v[j] = 1.0;
        for _pass in 0..2 {
            for i in 0..j {
                let r = gq.column(i).dot(&v);
                v.axpy(-r, &q.column(i), 1.0);
            }
        }
        let gv = gram * &v;
        let norm2 = v.dot(&gv);
        if !(norm2 > 0.0) {
            return Err(Error::IllConditionedBasis {
                condition: f64::INFINITY,
            });
        }
        let norm = norm2.sqrt();
        q.set_column(j, &(v / norm));
        gq.set_column(j, &(gv / norm));
    }
    Ok(q)
}

/// Max-abs deviation of `Qᵀ G Q` from the identity.
pub fn orthonormality_defect(q: &DMatrix<f64>, gram: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * gram * q;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// `A ⊗ B` in the convention `vec(B X Aᵀ) = (A ⊗ B) vec(X)` (column-major).
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-major flattening of a matrix.
pub fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_fixed_point() {
        let g = DMatrix::<f64>::identity(6, 6);
        let q = gram_schmidt(&g).unwrap();
        assert!((q - DMatrix::<f64>::identity(6, 6)).abs().max() < 1e-12);
    }

    #[test]
    fn hilbert_like_gram() {
        // Gram of monomials on [0, 1] (Hilbert matrix), moderate size
        let n = 5;
        let g = DMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        let q = gram_schmidt(&g).unwrap();
        assert!(orthonormality_defect(&q, &g) < 1e-10);
        for i in 0..n {
            for j in 0..i {
                assert_eq!(q[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn singular_gram_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(gram_schmidt(&g), Err(Error::IllConditionedBasis { .. })));
    }

    #[test]
    fn kron_matches_vec_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, -1.0, 2.0, 1.0, 0.0, 3.0, 1.0]);
        let x = DMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 + 0.5);
        let lhs = vec_of(&(&b * &x * a.transpose()));
        let rhs = kron(&a, &b) * vec_of(&x);
        assert!((lhs - rhs).abs().max() < 1e-13);
    }
}
