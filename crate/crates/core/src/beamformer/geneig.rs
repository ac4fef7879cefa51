use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Top generalized eigenpairs of a Hermitian pencil `(A, B)`.
#[derive(Debug, Clone)]
pub struct GenEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors, in the same order as `values`.
    pub vectors: Vec<DVector<Complex64>>,
}

impl GenEigen {
    /// Eigenvectors as the columns of an `N × k` matrix.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_columns(&self.vectors)
    }
}

pub(crate) fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Scales `v` to unit norm and rotates its global phase so the first entry
/// of (near-)maximal modulus is real and positive.
pub(crate) fn normalize_phase(mut v: DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.norm();
    if norm > 0.0 {
        v /= Complex64::new(norm, 0.0);
    }
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(pivot) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).copied() {
        if pivot.norm() > 0.0 {
            let rot = pivot.conj() / pivot.norm();
            v *= rot;
        }
    }
    v
}

/// Top-`k` generalized eigenpairs of `(a, b)` with `a` Hermitian PSD and `b`
/// Hermitian positive definite, solved by Cholesky whitening `b = L L^H`
/// followed by a standard Hermitian eigenproblem on `L⁻¹ a L⁻ᴴ`.
pub fn herm_gen_eig_top(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, k: usize) -> Result<GenEigen> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::Domain(format!(
            "pencil dimensions differ: a is {}x{}, b is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Domain(format!("requested {k} eigenpairs of a {n}x{n} pencil")));
    }
    let b = hermitian_part(b);
    // complex Cholesky happily takes square roots of negative pivots, so
    // definiteness is checked on the spectrum first
    let min = b.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::Numerical(format!(
            "denominator matrix is not positive definite (smallest eigenvalue {min:e})"
        )));
    }
    let chol = b
        .cholesky()
        .ok_or_else(|| Error::Numerical("Cholesky factorization of denominator failed".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&hermitian_part(a))
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let eig = SymmetricEigen::new(hermitian_part(&c));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let l_adj = l.adjoint();
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let mut lambda = eig.eigenvalues[i];
        if lambda < 0.0 && lambda > -1e-9 * scale {
            lambda = 0.0;
        }
        let w = eig.eigenvectors.column(i).into_owned();
        let v = l_adj
            .solve_upper_triangular(&w)
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        values.push(lambda);
        vectors.push(normalize_phase(v));
    }
    Ok(GenEigen { values, vectors })
}
