//! Small dense helpers on top of nalgebra for Hermitian complex matrices.

use nalgebra::{Cholesky, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Largest `|A - A^H|` entry.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Real trace of a matrix expected to have a real trace.
pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

/// Checks the Hermitian and positive-semidefinite invariants used for
/// weighting matrices and covariances.
pub fn check_hermitian_psd(a: &CMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("{what} must be square")));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let defect = hermitian_defect(a);
    if defect > 1e-12 * scale.max(1.0) {
        return Err(Error::Invariant(format!(
            "{what} is not Hermitian (defect {defect:.3e})"
        )));
    }
    let tr = trace(a).re.abs();
    if let Some(&min) = hermitian_eigenvalues(a).first() {
        if min < -1e-10 * tr.max(scale) {
            return Err(Error::Invariant(format!(
                "{what} is not positive semidefinite (eigenvalue {min:.3e})"
            )));
        }
    }
    Ok(())
}

/// Solves `A x = b` for Hermitian positive-definite `A`.
pub fn hpd_solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let chol = Cholesky::new(hermitian_part(a))
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    let x = chol.solve(b);
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(x)
    } else {
        Err(Error::Numerical("non-finite solution".into()))
    }
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn hpd_inverse(a: &CMatrix) -> Result<CMatrix> {
    if a.nrows() == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let chol = Cholesky::new(hermitian_part(a))
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    Ok(hermitian_part(&chol.inverse()))
}

/// Submatrix `A[rows, cols]`.
pub fn submatrix(a: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Columns `cols` of `A`.
pub fn select_columns(a: &CMatrix, cols: &[usize]) -> CMatrix {
    a.select_columns(cols.iter())
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
