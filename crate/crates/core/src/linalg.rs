//! Small dense linear-algebra helpers shared across the crate.
//!
//! Everything operates on `nalgebra::DMatrix<Complex64>`; matrices are tiny
//! (N x N with N of order tens), so clarity wins over cleverness.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest absolute entry; used for cheap defect norms.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("eigenvalue comparison")
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Apply a real scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_matrix_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let diag = CVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(f(v), 0.0)));
    &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
}

/// exp(-i t H) for Hermitian `h`.
pub fn unitary_exp(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&e| (-C64::i() * (e * t)).exp()),
    );
    &vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint()
}

/// Operator norm (largest |eigenvalue|) of a Hermitian matrix.
pub fn hermitian_operator_norm(m: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Hermitian square root with negative eigenvalues clamped to zero.
/// Returns the root and the largest clamped magnitude.
pub fn hermitian_sqrt_clamped(m: &CMatrix) -> (CMatrix, f64) {
    let (values, vectors) = hermitian_eigen(m);
    let clamp = values.iter().fold(0.0f64, |acc, &v| acc.max((-v).max(0.0)));
    let diag = CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::new(v.max(0.0).sqrt(), 0.0)),
    );
    let root = &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint();
    (root, clamp)
}
