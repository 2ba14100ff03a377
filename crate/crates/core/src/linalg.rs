//! Small dense linear-algebra helpers on top of `nalgebra`.
//!
//! Every positivity test in the crate goes through [`herm_eigh`]: a Hermitian
//! eigendecomposition is well defined on the PSD boundary, where Cholesky is not.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;
pub type CMat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `re + i·im` as a complex matrix.
pub fn complexify(re: &RMat, im: &RMat) -> CMat {
    assert_eq!(re.shape(), im.shape());
    CMat::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

pub fn to_complex(re: &RMat) -> CMat {
    re.map(|x| Complex64::new(x, 0.0))
}

/// Replaces `a` by `(a + a†)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn symmetric_part(a: &RMat) -> RMat {
    (a + a.transpose()) * 0.5
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian matrix.
///
/// Only the Hermitian part of `a` is used.
pub fn herm_eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(a);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn herm_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eig(a: &CMat) -> f64 {
    herm_eigenvalues(a).first().copied().unwrap_or(0.0)
}

pub fn max_eig(a: &CMat) -> f64 {
    herm_eigenvalues(a).last().copied().unwrap_or(0.0)
}

/// Spectral norm of a real symmetric matrix.
pub fn sym_norm(a: &RMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    symmetric_part(a)
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Spectral norm of a Hermitian matrix.
pub fn herm_norm(a: &CMat) -> f64 {
    herm_eigenvalues(a).iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// 2-norm condition number; `inf` for exactly singular matrices.
pub fn condition_number(a: &RMat) -> f64 {
    let sv = a.singular_values();
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `f(a)` for Hermitian `a`, applied to the spectrum.
pub fn herm_fn(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eigh(a);
    let d = CMat::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| Complex64::new(f(x), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// `a^{-1/2}` for Hermitian positive definite `a`, eigenvalues floored at `floor`.
pub fn herm_inv_sqrt(a: &CMat, floor: f64) -> CMat {
    herm_fn(a, |x| 1.0 / x.max(floor).sqrt())
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &RMat, b: &RMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs_diff_c(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    // Tr(AB) without forming the product.
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}
