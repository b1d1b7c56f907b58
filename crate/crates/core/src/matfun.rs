//! Matrix analytic functions: exponential, logarithm, square root and the
//! `(e^z − 1)/z`, `(e^z − 1 − z)/z²` functions.

use nalgebra::ComplexField;
use nalgebra::Schur;

use crate::error::{Result, SplitError};
use crate::linalg::{block, identity, solve, zeros};
use crate::scalar::{all_finite, cr, lit, norm1, to_f64, CMat, Real, C};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    if !all_finite(a) {
        return Err(SplitError::NonFinite("matrix exponential input"));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    let nrm = to_f64(norm1(a));
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = cr(lit::<T>(0.5f64.powi(s)));
    let a = a * scale;
    let b: Vec<C<T>> = PADE13.iter().map(|v| cr(lit::<T>(*v))).collect();
    let id = identity::<T>(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !all_finite(&r) {
        return Err(SplitError::NonFinite("matrix exponential result"));
    }
    Ok(r)
}

/// Returns `(e^A, φ₁(A), φ₂(A))` with `φ₁(z) = (e^z − 1)/z` and
/// `φ₂(z) = (e^z − 1 − z)/z²`, read off the exponential of the block matrix
/// `[[A, I, 0], [0, 0, I], [0, 0, 0]]`.
pub fn phi_functions<T: Real>(a: &CMat<T>) -> Result<(CMat<T>, CMat<T>, CMat<T>)> {
    let n = a.nrows();
    let z = zeros::<T>(n, n);
    let id = identity::<T>(n);
    let big = block(&[&[a, &id, &z], &[&z, &z, &id], &[&z, &z, &z]]);
    let e = expm(&big)?;
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, n)).into_owned(),
        e.view((0, 2 * n), (n, n)).into_owned(),
    ))
}

/// Eigenvalues via a complex Schur decomposition.
pub fn eigenvalues<T: Real>(a: &CMat<T>) -> Result<Vec<C<T>>> {
    let schur = Schur::try_new(a.clone(), T::default_epsilon(), 10_000)
        .ok_or_else(|| SplitError::Singular("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Distance of `z` from the closed negative real half-line `(−∞, 0]`.
pub fn distance_to_branch_cut<T: Real>(z: C<T>) -> T {
    if z.re <= T::zero() {
        z.im.abs()
    } else {
        z.modulus()
    }
}

/// Square root by the product form of the Denman–Beavers iteration.
pub fn sqrtm<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    let n = a.nrows();
    let id = identity::<T>(n);
    let half = cr(lit::<T>(0.5));
    let mut m = a.clone();
    let mut y = a.clone();
    let stop = T::default_epsilon() * lit::<T>(8.0 * n.max(1) as f64);
    for _ in 0..100 {
        let minv = solve(&m, &id)?;
        y = &y * (&id + &minv) * half;
        m = (&id + (&m + &minv) * half) * half;
        if norm1(&(&m - &id)) <= stop {
            return Ok(y);
        }
    }
    if norm1(&(&m - &id)) <= stop.sqrt() {
        Ok(y)
    } else {
        Err(SplitError::SeriesDivergence { terms: 100 })
    }
}

/// Gauss–Legendre nodes and weights on [0, 1].
fn gauss_legendre_01(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for k in 0..m {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Fails with [`SplitError::LogBranch`] when an eigenvalue lies within
/// `guard` of the closed negative real axis.
pub fn logm<T: Real>(a: &CMat<T>, guard: f64) -> Result<CMat<T>> {
    if !all_finite(a) {
        return Err(SplitError::NonFinite("matrix logarithm input"));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    let dist = eigenvalues(a)?
        .into_iter()
        .map(distance_to_branch_cut)
        .fold(T::max_value().unwrap_or_else(T::one), |x, y| x.min(y));
    if to_f64(dist) <= guard {
        return Err(SplitError::LogBranch { distance: to_f64(dist) });
    }
    let id = identity::<T>(n);
    let mut x = a.clone();
    let mut k = 0;
    while to_f64(norm1(&(&x - &id))) > 0.25 {
        if k >= 64 {
            return Err(SplitError::SeriesDivergence { terms: k });
        }
        x = sqrtm(&x)?;
        k += 1;
    }
    let xm = &x - &id;
    let (nodes, weights) = gauss_legendre_01(10);
    let mut acc = zeros::<T>(n, n);
    for (node, w) in nodes.iter().zip(weights.iter()) {
        let denom = &id + &xm * cr(lit::<T>(*node));
        acc += solve(&denom, &xm)? * cr(lit::<T>(*w));
    }
    Ok(acc * cr(lit::<T>(2f64.powi(k as i32))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::fro;
    use num_complex::Complex;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> CMat<f64> {
        nalgebra::DMatrix::from_row_slice(2, 2, &[a, b, c, d]).map(|v| Complex::new(v, 0.0))
    }

    #[test]
    fn expm_rotation() {
        let t = 0.7f64;
        let e = expm(&m2(0.0, t, -t, 0.0)).unwrap();
        let want = m2(t.cos(), t.sin(), -t.sin(), t.cos());
        assert!(fro(&(e - want)) < 1e-15);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        let e = expm(&m2(20.0, 0.0, 0.0, -3.0)).unwrap();
        assert!(((e[(0, 0)].re - 20f64.exp()) / 20f64.exp()).abs() < 1e-13);
        assert!((e[(1, 1)].re - (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn phi_functions_scalar_values() {
        let z = 0.3f64;
        let (e, p1, p2) = phi_functions(&m2(z, 0.0, 0.0, 0.0)).unwrap();
        assert!((e[(0, 0)].re - z.exp()).abs() < 1e-15);
        assert!((p1[(0, 0)].re - (z.exp() - 1.0) / z).abs() < 1e-15);
        assert!((p2[(0, 0)].re - (z.exp() - 1.0 - z) / (z * z)).abs() < 1e-15);
        assert!((p1[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!((p2[(1, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn logm_inverts_expm() {
        let a = nalgebra::DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex::new(0.1, 0.3),
                Complex::new(-0.4, 0.0),
                Complex::new(0.2, -0.1),
                Complex::new(0.5, 0.0),
                Complex::new(-0.2, 0.2),
                Complex::new(0.0, 0.7),
                Complex::new(0.3, 0.1),
                Complex::new(0.1, 0.0),
                Complex::new(0.6, -0.5),
            ],
        );
        let l = logm(&expm(&a).unwrap(), 1e-8).unwrap();
        assert!(fro(&(l - a)) < 1e-13);
    }

    #[test]
    fn logm_rejects_negative_eigenvalue() {
        let err = logm(&m2(-1.0, 0.0, 0.0, 2.0), 1e-8).unwrap_err();
        assert!(matches!(err, SplitError::LogBranch { .. }));
    }

    #[test]
    fn sqrtm_squares_back() {
        let a = m2(4.0, 1.0, 0.0, 9.0);
        let s = sqrtm(&a).unwrap();
        assert!(fro(&(&s * &s - a)) < 1e-13);
    }

    #[test]
    fn f32_expm_smoke() {
        let a = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0f32, 1.0, -1.0, 0.0]).map(|v| Complex::new(v, 0.0));
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - 1f32.cos()).abs() < 1e-6);
    }
}
