//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::ComplexField;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, SplitError};
use crate::scalar::{cone, cr, czero, CMat, Real, RMat};

/// The real symplectic matrix `J = [[0, I], [-I, 0]]` of size `2n`.
pub fn symplectic_j_real<T: Real>(n: usize) -> RMat<T> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = T::one();
        j[(n + k, k)] = -T::one();
    }
    j
}

pub fn symplectic_j<T: Real>(n: usize) -> CMat<T> {
    symplectic_j_real::<T>(n).map(cr)
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

/// Largest entrywise distance between `m` and its transpose.
pub fn asymmetry<T: Real>(m: &CMat<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)]).modulus();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn symmetrize<T: Real>(m: &CMat<T>) -> CMat<T> {
    let half = cr(crate::scalar::lit::<T>(0.5));
    (m + m.transpose()) * half
}

pub fn real_asymmetry<T: Real>(m: &RMat<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Smallest eigenvalue of a Hermitian matrix (the input is Hermitian-averaged first).
pub fn hermitian_min_eigenvalue<T: Real>(h: &CMat<T>) -> T {
    if h.nrows() == 0 {
        return T::zero();
    }
    let half = cr(crate::scalar::lit::<T>(0.5));
    let herm = (h + h.adjoint()) * half;
    let eig = SymmetricEigen::new(herm);
    eig.eigenvalues.iter().copied().fold(T::max_value().unwrap_or_else(T::one), |a, b| {
        if b < a {
            b
        } else {
            a
        }
    })
}

/// Eigenvalues of a real symmetric matrix in ascending order.
pub fn symmetric_eigenvalues<T: Real>(m: &RMat<T>) -> Vec<T> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let half = crate::scalar::lit::<T>(0.5);
    let sym = (m + m.transpose()) * half;
    let mut v: Vec<T> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn min_symmetric_eigenvalue<T: Real>(m: &RMat<T>) -> T {
    symmetric_eigenvalues(m).first().copied().unwrap_or_else(T::zero)
}

pub fn solve<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| SplitError::Singular("LU solve failed".into()))
}

pub fn inverse<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    solve(a, &identity(a.nrows()))
}

/// Moore–Penrose pseudo-inverse with relative singular-value cutoff `rcond`.
pub fn pinv_real<T: Real>(a: &RMat<T>, rcond: T) -> RMat<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return RMat::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(T::zero(), |x, y| x.max(y));
    let cut = smax * rcond;
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut out = RMat::zeros(a.ncols(), a.nrows());
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > cut && *s > T::zero() {
            let inv = T::one() / *s;
            out += vt.row(k).transpose() * u.column(k).transpose() * inv;
        }
    }
    out
}

/// Numerical rank with relative cutoff.
pub fn rank_real<T: Real>(a: &RMat<T>, rcond: T) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(T::zero(), |x, y| x.max(y));
    sv.iter().filter(|s| **s > smax * rcond && **s > T::zero()).count()
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn orthonormal_range<T: Real>(a: &RMat<T>, rcond: T) -> RMat<T> {
    if a.ncols() == 0 {
        return RMat::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let smax = svd.singular_values.iter().copied().fold(T::zero(), |x, y| x.max(y));
    let u = svd.u.expect("u requested");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > smax * rcond && **s > T::zero())
        .map(|(k, _)| k)
        .collect();
    RMat::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Assembles a block matrix from a row-major grid of blocks.
pub fn block<T: Real>(rows: &[&[&CMat<T>]]) -> CMat<T> {
    let heights: Vec<usize> = rows.iter().map(|r| r[0].nrows()).collect();
    let widths: Vec<usize> = rows[0].iter().map(|b| b.ncols()).collect();
    let mut out = CMat::from_element(heights.iter().sum(), widths.iter().sum(), czero());
    let mut r0 = 0;
    for (bi, row) in rows.iter().enumerate() {
        let mut c0 = 0;
        for (bj, b) in row.iter().enumerate() {
            out.view_mut((r0, c0), (heights[bi], widths[bj])).copy_from(*b);
            c0 += widths[bj];
        }
        r0 += heights[bi];
    }
    out
}

pub fn zeros<T: Real>(r: usize, c: usize) -> CMat<T> {
    CMat::from_element(r, c, czero())
}

pub fn eye_scaled<T: Real>(n: usize, s: crate::scalar::C<T>) -> CMat<T> {
    CMat::from_diagonal_element(n, n, s * cone::<T>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_squares_to_minus_identity() {
        let j = symplectic_j::<f64>(3);
        let jj = &j * &j;
        assert!((jj + identity::<f64>(6)).norm() < 1e-15);
    }

    #[test]
    fn pinv_of_rank_deficient() {
        let a = RMat::<f64>::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.0, 0.0]);
        let p = pinv_real(&a, 1e-12);
        let apa = &a * &p * &a;
        assert!((apa - &a).norm() < 1e-12);
        assert_eq!(rank_real(&a, 1e-12), 1);
    }

    #[test]
    fn hermitian_min_eig() {
        let h = RMat::<f64>::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]).map(cr);
        assert!((hermitian_min_eigenvalue(&h) - 1.0).abs() < 1e-14);
    }
}
