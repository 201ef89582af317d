//! Brute-force references built only from projectors and Hermitian eigendecompositions.
#![allow(dead_code)]

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use supermap_core::builders::{gaussian_matrix, rng};
use supermap_core::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let f = Mat::from_fn(n, n, |i, j| m[(i, j)]);
    let e = f.self_adjoint_eigen(Side::Lower).unwrap();
    let s = e.S().column_vector();
    let u = e.U();
    (
        (0..n).map(|i| s[i].re).collect(),
        DMatrix::from_fn(n, n, |i, j| u[(i, j)]),
    )
}

/// Projector onto the column span of `m`, from the eigenvectors of `m m†`.
pub fn span_projector(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(n, n);
    }
    let g = m * m.adjoint();
    let (vals, vecs) = eigh(&g);
    let top = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut p = DMatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v > 1e-14 * top.max(1.0) {
            let u = vecs.column(i);
            p += u * u.adjoint();
        }
    }
    p
}

/// Eigenvalue-1 space of `P_s P_t P_s`.
pub fn intersection_projector(ps: &DMatrix<C64>, pt: &DMatrix<C64>) -> DMatrix<C64> {
    let n = ps.nrows();
    let (vals, vecs) = eigh(&(ps * pt * ps));
    let mut p = DMatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v > 1.0 - 1e-9 {
            let u = vecs.column(i);
            p += u * u.adjoint();
        }
    }
    p
}

pub fn rank(p: &DMatrix<C64>) -> usize {
    p.trace().re.round() as usize
}

/// Spectral norm of `P − Q`; equals the sine of the largest principal angle for equal ranks.
pub fn projector_distance(p: &DMatrix<C64>, q: &DMatrix<C64>) -> f64 {
    let (vals, _) = eigh(&(p - q));
    vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

/// Support of `Σ_j Tr_E |η_j⟩⟨η_j|` for random `η_j` in the span of `w`, with E the
/// leading factor of dimension `de` (row-major `e·d_F + f`).
pub fn reduced_support(w: &DMatrix<C64>, de: usize, samples: usize, seed: u64) -> DMatrix<C64> {
    let df = w.nrows() / de;
    let mut g = rng(seed);
    let mut rho = DMatrix::<C64>::zeros(df, df);
    for _ in 0..samples {
        let eta = w * gaussian_matrix(w.ncols(), 1, &mut g);
        for e in 0..de {
            let blk = DMatrix::from_fn(df, 1, |f, _| eta[(e * df + f, 0)]);
            rho += &blk * blk.adjoint();
        }
    }
    span_projector(&rho)
}

pub fn unit(v: &[C64]) -> DVector<C64> {
    let d = DVector::from_column_slice(v);
    let n = d.norm();
    d / c(n, 0.0)
}

pub fn ket(d: usize, i: usize) -> DVector<C64> {
    let mut v = DVector::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

/// `U(P ⊗ α ⊗ β)` for an operator on `P ⊗ A_O ⊗ B_O → A_I ⊗ B_I ⊗ F`.
pub fn v_ab(u: &DMatrix<C64>, dp: usize, a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    u * DMatrix::<C64>::identity(dp, dp).kronecker(a).kronecker(b)
}

pub fn col(v: &DVector<C64>) -> DMatrix<C64> {
    DMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

/// Orthonormal complement of one vector, read off the eigenvectors of `I − |v⟩⟨v|`.
pub fn perp(v: &DVector<C64>) -> DMatrix<C64> {
    let n = v.len();
    let q = DMatrix::<C64>::identity(n, n) - col(v) * col(v).adjoint() / c(v.norm_squared(), 0.0);
    let (vals, vecs) = eigh(&q);
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    DMatrix::from_fn(n, keep.len(), |r, k| vecs[(r, keep[k])])
}

/// Span of `(⟨e| ⊗ 1) w_j` over E basis vectors and columns of `w`, as a projector.
pub fn reduced_span(w: &DMatrix<C64>, de: usize) -> DMatrix<C64> {
    let df = w.nrows() / de;
    let m = DMatrix::from_fn(df, de * w.ncols(), |f, k| w[((k % de) * df + f, k / de)]);
    span_projector(&m)
}

/// Point triple `(|, □, −)` of F projectors, straight from the definitions.
pub fn f_point_oracle(
    u: &DMatrix<C64>,
    dims: [usize; 6],
    alpha: &DVector<C64>,
    beta: &DVector<C64>,
) -> [DMatrix<C64>; 3] {
    let [dp, dai, _, dbi, _, _] = dims;
    let de = dai * dbi;
    let fab = reduced_span(&v_ab(u, dp, &col(alpha), &col(beta)), de);
    let fa = reduced_span(&v_ab(u, dp, &perp(alpha), &col(beta)), de);
    let fb = reduced_span(&v_ab(u, dp, &col(alpha), &perp(beta)), de);
    let vert = intersection_projector(&fab, &fa);
    let horiz = intersection_projector(&fab, &fb);
    let n = fab.nrows();
    let rest = DMatrix::<C64>::identity(n, n) - span_projector(&(&vert + &horiz));
    let boxed = intersection_projector(&fab, &rest);
    [vert, boxed, horiz]
}

/// Null space of `m` as a projector, from the eigenvalues of `m† m`.
pub fn kernel_projector(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.ncols();
    let (vals, vecs) = eigh(&(m.adjoint() * m));
    let mut p = DMatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v < 1e-12 {
            let u = vecs.column(i);
            p += u * u.adjoint();
        }
    }
    p
}

/// `P^t_{αβ} = {x : U(x ⊗ α ⊗ β) ∈ A_I B_I ⊗ F^t}` for each F projector of the point triple.
pub fn p_point_oracle(
    u: &DMatrix<C64>,
    dims: [usize; 6],
    alpha: &DVector<C64>,
    beta: &DVector<C64>,
) -> [DMatrix<C64>; 3] {
    let [dp, dai, _, dbi, _, df] = dims;
    let v = v_ab(u, dp, &col(alpha), &col(beta));
    let id_e = DMatrix::<C64>::identity(dai * dbi, dai * dbi);
    let id_f = DMatrix::<C64>::identity(df, df);
    f_point_oracle(u, dims, alpha, beta).map(|pf| kernel_projector(&(id_e.kronecker(&(&id_f - pf)) * &v)))
}
