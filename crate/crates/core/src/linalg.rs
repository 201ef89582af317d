//! SVD and Hermitian eigenvalues through faer.
//!
//! nalgebra 0.35's SVD (real and complex) returns wrong factors on some
//! rank-deficient inputs, e.g. a 16x2 matrix of two orthonormal columns came back
//! with a singular value 1.000145 and a 1.7e-2 reconstruction error. Matrices stay
//! nalgebra `DMatrix` everywhere else; they are copied into faer only here.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::tensor::C64;

fn to_faer(m: &DMatrix<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(m).singular_values().expect("svd did not converge");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis of the column span of `m`, ordered by descending singular value.
/// Rank counts singular values above `tol · max(σ_max, 1)`.
pub(crate) fn orth(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = to_faer(m).thin_svd().expect("svd did not converge");
    let (u, s) = (svd.U(), svd.S().column_vector());
    let sv: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let cut = tol * smax.max(1.0);
    let keep: Vec<usize> = idx.into_iter().filter(|&i| sv[i] > cut).collect();
    DMatrix::from_fn(n, keep.len(), |r, c| u[(r, keep[c])])
}

/// Eigenvalues of a Hermitian matrix in ascending order. Only the lower triangle is read.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m)
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("eigensolver did not converge")
}
