//! Dense complex matrix helpers.
//!
//! Every spectral quantity in the crate (trace norms, matrix square roots,
//! Helstrom projectors, purifications) goes through [`hermitian_eigen`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues this close below zero are treated as numerical drift.
pub const PSD_TOLERANCE: f64 = 1e-10;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back in descending order. Each eigenvector is rotated so
/// that its largest-magnitude component is real and positive, which makes the
/// output reproducible across runs.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // Symmetrize first; the solver only reads one triangle.
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut values = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let pivot =
            col.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap_or(C64::new(1.0, 0.0));
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { c(1.0) };
        vectors.set_column(dst, &(col * phase));
    }
    (values, vectors)
}

/// Rebuilds `V diag(f(λ)) V†` from an eigendecomposition.
pub fn spectral_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        for r in 0..n {
            scaled[(r, k)] *= w;
        }
    }
    &scaled * vectors.adjoint()
}

/// Eigenvalues of a PSD matrix at or below this level are rounding noise.
/// Square roots would inflate them from ~1e-17 to ~1e-9, so they are zeroed.
pub fn spectral_noise_floor(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    4.0 * values.len() as f64 * f64::EPSILON * scale
}

/// Principal square root of a positive semidefinite matrix. Negative and
/// noise-level eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let floor = spectral_noise_floor(&values);
    spectral_map(&values, &vectors, |x| if x > floor { x.sqrt() } else { 0.0 })
}

/// Sum of singular values.
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    m.singular_values().iter().sum()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.iter().map(|x| x.abs()).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(&(m.adjoint() * m), &identity(m.nrows())) <= tol
}

/// Unitary factor `Y X†` of the singular value decomposition `M = X Σ Y†`,
/// i.e. the unitary `U` maximizing `|tr(U M)|`. Returns it together with the
/// singular values.
pub fn maximizing_unitary(m: &CMatrix) -> (CMatrix, Vec<f64>) {
    let n = m.nrows();
    assert!(m.is_square(), "maximizing_unitary needs a square matrix");
    if n == 0 {
        return (CMatrix::zeros(0, 0), Vec::new());
    }
    let svd = m.clone().svd(true, true);
    let x = svd.u.expect("requested left singular vectors");
    let y_adj = svd.v_t.expect("requested right singular vectors");
    let unitary = y_adj.adjoint() * x.adjoint();
    (unitary, svd.singular_values.iter().copied().collect())
}
