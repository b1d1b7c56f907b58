//! Exact splittings with explicit coefficients.

use crate::error::{Result, SplitError};
use crate::program::{SplitStep, SplittingProgram};
use crate::scalar::{c, lit, to_f64, Real, RMat, RVec, C};
use crate::symplectic::QuadraticSymbol;

fn diag_v<T: Real>(v: T) -> RMat<T> {
    RMat::from_row_slice(2, 2, &[T::zero(), T::zero(), T::zero(), v])
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !t.is_finite() || t < T::zero() {
        return Err(SplitError::InvalidParameter(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// Symbol `|x|² + |ξ|²` of `|x|² − Δ`.
pub fn harmonic_symbol<T: Real>(n: usize) -> QuadraticSymbol<T> {
    QuadraticSymbol::from_real(n, &RMat::identity(2 * n, 2 * n), &RVec::zeros(2 * n), T::zero()).expect("valid symbol")
}

/// `e^{−t(|x|²−Δ)} = e^{−½tanh(t)|x|²} e^{½sinh(2t)Δ} e^{−½tanh(t)|x|²}`.
pub fn harmonic_oscillator<T: Real>(t: T, n: usize) -> Result<SplittingProgram<T>> {
    check_time(t)?;
    if n == 0 {
        return Err(SplitError::ZeroDimension);
    }
    let half = lit::<T>(0.5);
    let g = RMat::identity(n, n) * (t.tanh() * half);
    let f = RMat::identity(n, n) * ((t + t).sinh() * half);
    SplittingProgram::catalog(
        n,
        vec![SplitStep::GaussianX { b: g.clone() }, SplitStep::GaussianFourier { b: f }, SplitStep::GaussianX { b: g }],
        harmonic_symbol(n),
        t,
        "harmonic",
    )
}

/// Symbol `−i(x₂ξ₁ − x₁ξ₂)` generating `u ↦ u(R_θ x)` at time `θ`,
/// `R_θ = [[cos θ, sin θ], [−sin θ, cos θ]]`.
pub fn rotation_symbol<T: Real>() -> QuadraticSymbol<T> {
    let m = RMat::from_row_slice(2, 2, &[T::zero(), T::one(), -T::one(), T::zero()]);
    transport_symbol(&m)
}

/// Symbol of the transport generator `(Mx)·∇`, so that `e^{−t s^w}u = u∘e^{tM}`.
pub fn transport_symbol<T: Real>(m: &RMat<T>) -> QuadraticSymbol<T> {
    let n = m.nrows();
    let mut q = crate::scalar::CMat::<T>::from_element(2 * n, 2 * n, crate::scalar::czero());
    let half = lit::<T>(0.5);
    for j in 0..n {
        for k in 0..n {
            // −i M_jk x_k ξ_j
            let v = C::new(T::zero(), -m[(j, k)] * half);
            q[(k, n + j)] += v;
            q[(n + j, k)] += v;
        }
    }
    let tr = (0..n).fold(T::zero(), |a, j| a + m[(j, j)]);
    let y = crate::scalar::CVec::<T>::from_element(2 * n, crate::scalar::czero());
    QuadraticSymbol::new(n, q, y, C::new(tr * half, T::zero())).expect("valid symbol")
}

pub const DEFAULT_ANGLE_MARGIN: f64 = 1e-3;

/// Three shears reproducing the rotation `u ↦ u(R_θ x)`.
pub fn rotation2d<T: Real>(theta: T) -> Result<SplittingProgram<T>> {
    rotation2d_with_margin(theta, lit(DEFAULT_ANGLE_MARGIN))
}

pub fn rotation2d_with_margin<T: Real>(theta: T, margin: T) -> Result<SplittingProgram<T>> {
    let max_safe = T::pi() - margin;
    if !theta.is_finite() || theta.abs() >= max_safe {
        return Err(SplitError::NearSingularAngle { theta: to_f64(theta), max_safe: to_f64(max_safe) });
    }
    let tn = (theta * lit::<T>(0.5)).tan();
    SplittingProgram::catalog(
        2,
        vec![
            SplitStep::Shear { target: 0, source: 1, alpha: tn },
            SplitStep::Shear { target: 1, source: 0, alpha: -theta.sin() },
            SplitStep::Shear { target: 0, source: 1, alpha: tn },
        ],
        rotation_symbol(),
        theta,
        "rotation2d",
    )
}

/// Symbol `−ixξ + ½` of `−x∂_x`; at time `ln λ` the semigroup is `u ↦ u(λx)`.
pub fn dilatation_symbol<T: Real>() -> QuadraticSymbol<T> {
    let q = crate::scalar::CMat::<T>::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, -0.5), c(0.0, 0.0)]);
    QuadraticSymbol::new(1, q, crate::scalar::CVec::from_element(2, c(0.0, 0.0)), c(0.5, 0.0)).expect("valid symbol")
}

/// Chirp coefficients `(α, β, ε)` of a positive dilatation.
pub fn dilatation_coefficients<T: Real>(lambda: T) -> (T, T, T) {
    let half = lit::<T>(0.5);
    let inv = T::one() / lambda;
    let alpha = half * ((inv - T::one()).abs() * inv).sqrt();
    let beta = half * (T::one() - lambda).abs().sqrt();
    let eps = if lambda <= T::one() { T::one() } else { -T::one() };
    (alpha, beta, eps)
}

fn one<T: Real>(v: T) -> RMat<T> {
    RMat::from_element(1, 1, v)
}

/// `u ↦ u(λx)` for `λ > 0` by four chirps and a constant factor `λ^{−1/2}`.
pub fn dilatation<T: Real>(lambda: T) -> Result<SplittingProgram<T>> {
    if !lambda.is_finite() || lambda <= T::zero() {
        return Err(SplitError::InvalidParameter(format!("dilatation factor must be positive, got {lambda}")));
    }
    let (a, b, e) = dilatation_coefficients(lambda);
    SplittingProgram::catalog(
        1,
        vec![
            SplitStep::XQuadratic { a: one(a) },
            SplitStep::FourierQuadratic { a: one(e * b) },
            SplitStep::XQuadratic { a: one(-b) },
            SplitStep::FourierQuadratic { a: one(-e * a) },
            SplitStep::Scalar { gamma: C::new(lit::<T>(-0.5) * lambda.ln(), T::zero()) },
        ],
        dilatation_symbol(),
        lambda.ln(),
        "dilatation",
    )
}

/// `u ↦ u(−x)`, written as `−i·e^{i(π/2)(x² − ∂²)}`: two quarter turns in
/// phase space, each a chirp / Fourier chirp / chirp triple. Experimental.
pub fn reflection1d<T: Real>() -> Result<SplittingProgram<T>> {
    let h = lit::<T>(0.5);
    let pi = T::pi();
    let q = crate::scalar::CMat::<T>::from_diagonal_element(2, 2, C::new(T::zero(), -pi * h));
    let target = QuadraticSymbol::new(1, q, crate::scalar::CVec::from_element(2, c(0.0, 0.0)), C::new(T::zero(), pi * h))?;
    SplittingProgram::catalog(
        1,
        vec![
            SplitStep::XQuadratic { a: one(-h) },
            SplitStep::FourierQuadratic { a: one(h) },
            SplitStep::XQuadratic { a: one(-T::one()) },
            SplitStep::FourierQuadratic { a: one(h) },
            SplitStep::XQuadratic { a: one(-h) },
            SplitStep::Scalar { gamma: C::new(T::zero(), -pi * h) },
        ],
        target,
        T::one(),
        "reflection1d",
    )
}

/// Symbol `ivξ + η² − ivη − ½` in variables `(x, v; ξ, η)`, the Weyl symbol of
/// `v∂_x − ∂_v(v + ∂_v)`.
pub fn fokker_planck_symbol<T: Real>() -> QuadraticSymbol<T> {
    let z = c::<T>(0.0, 0.0);
    let ih = c::<T>(0.0, 0.5);
    let q = crate::scalar::CMat::<T>::from_row_slice(
        4,
        4,
        &[z, z, z, z, z, z, ih, -ih, z, ih, z, z, z, -ih, z, c(1.0, 0.0)],
    );
    QuadraticSymbol::new(2, q, crate::scalar::CVec::from_element(4, z), c(-0.5, 0.0)).expect("valid symbol")
}

/// The Gaussian-Fourier matrix `A_t` of the Fokker–Planck splitting.
pub fn fokker_planck_matrix<T: Real>(t: T) -> RMat<T> {
    let h = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let et = t.exp();
    let a11 = h * ((two * t).exp() + two * t + lit::<T>(3.0) - lit::<T>(4.0) * et);
    let s = (h * t).sinh();
    let a12 = -two * s * s;
    let a22 = h * (T::one() - (-two * t).exp());
    RMat::from_row_slice(2, 2, &[a11, a12, a12, a22])
}

/// The closed form `(3e^{4t} − 12e^{3t} + (8t+2)e^{2t} + 20e^t − 8t − 13)e^{−2t}/16`.
/// It does not agree with `det A_t` for `t > 0`; see [`fokker_planck_det_exact`].
pub fn fokker_planck_det_closed_form<T: Real>(t: T) -> T {
    let e = |k: f64| (lit::<T>(k) * t).exp();
    let p = lit::<T>(3.0) * e(4.0) - lit::<T>(12.0) * e(3.0) + (lit::<T>(8.0) * t + lit::<T>(2.0)) * e(2.0) + lit::<T>(20.0) * e(1.0)
        - lit::<T>(8.0) * t
        - lit::<T>(13.0);
    p * e(-2.0) / lit::<T>(16.0)
}

/// `det A_t = t(1 − e^{−2t})/2 − (1 − e^{−t})²`.
pub fn fokker_planck_det_exact<T: Real>(t: T) -> T {
    let h = lit::<T>(0.5);
    let om = T::one() - (-t).exp();
    t * (T::one() - (-(t + t)).exp()) * h - om * om
}

/// Chirp coefficients `(α_t, β_t)` of the velocity dilatation in the Fokker–Planck splitting.
pub fn fokker_planck_chirps<T: Real>(t: T) -> (T, T) {
    let h = lit::<T>(0.5);
    let em = (-t).exp();
    (h * ((T::one() - em) * em).sqrt(), h * (t.exp() - T::one()).sqrt())
}

/// Exact splitting of `e^{−t(v∂_x − ∂_v(v+∂_v))}`: velocity dilatation by chirps,
/// a Gaussian Fourier multiplier, a shear and the constant `e^{t/2}`.
pub fn fokker_planck<T: Real>(t: T) -> Result<SplittingProgram<T>> {
    check_time(t)?;
    let a_t = fokker_planck_matrix(t);
    check_psd(&a_t, "A_t")?;
    let (al, be) = fokker_planck_chirps(t);
    SplittingProgram::catalog(
        2,
        vec![
            SplitStep::XQuadratic { a: diag_v(al) },
            SplitStep::FourierQuadratic { a: diag_v(-be) },
            SplitStep::XQuadratic { a: diag_v(-be) },
            SplitStep::FourierQuadratic { a: diag_v(al) },
            SplitStep::GaussianFourier { b: a_t },
            SplitStep::Shear { target: 0, source: 1, alpha: T::one() - t.exp() },
            SplitStep::Scalar { gamma: C::new(t * lit::<T>(0.5), T::zero()) },
        ],
        fokker_planck_symbol(),
        t,
        "fokker_planck",
    )
}

fn check_psd<T: Real>(a: &RMat<T>, name: &str) -> Result<()> {
    let lam = crate::linalg::min_symmetric_eigenvalue(a);
    if lam < -crate::scalar::tol::<T>(1e-12) {
        return Err(SplitError::InvalidParameter(format!("{name} lost positivity (eigenvalue {:e})", to_f64(lam))));
    }
    Ok(())
}

/// Symbol `v² + η² + ivξ` of `v∂_x + v² − ∂_v²`.
pub fn kramers_fokker_planck_symbol<T: Real>() -> QuadraticSymbol<T> {
    let z = c::<T>(0.0, 0.0);
    let ih = c::<T>(0.0, 0.5);
    let o = c::<T>(1.0, 0.0);
    let q = crate::scalar::CMat::<T>::from_row_slice(4, 4, &[z, z, z, z, z, o, ih, z, z, ih, z, z, z, z, z, o]);
    QuadraticSymbol::new(2, q, crate::scalar::CVec::from_element(4, z), z).expect("valid symbol")
}

pub fn kramers_fokker_planck_matrix<T: Real>(t: T) -> RMat<T> {
    let h = lit::<T>(0.5);
    let sh = t.sinh();
    let th = t.tanh();
    let alpha = h * (t - th * (T::one() - sh * sh));
    RMat::from_row_slice(2, 2, &[h * alpha, h * sh * sh, h * sh * sh, h * (t + t).sinh()])
}

/// The closed form `¼ tanh(t)(t − tanh t)`. It does not agree with `det A_t`
/// for `t > 0`; see [`kramers_fokker_planck_det_exact`].
pub fn kramers_fokker_planck_det_closed_form<T: Real>(t: T) -> T {
    lit::<T>(0.25) * t.tanh() * (t - t.tanh())
}

/// `det A_t = sinh(2t)(t − tanh t)/8`.
pub fn kramers_fokker_planck_det_exact<T: Real>(t: T) -> T {
    (t + t).sinh() * (t - t.tanh()) / lit::<T>(8.0)
}

/// Exact splitting of `e^{−t(v∂_x + v² − ∂_v²)}` in four steps.
pub fn kramers_fokker_planck<T: Real>(t: T) -> Result<SplittingProgram<T>> {
    check_time(t)?;
    let a_t = kramers_fokker_planck_matrix(t);
    check_psd(&a_t, "A_t")?;
    let g = diag_v(t.tanh() * lit::<T>(0.5));
    SplittingProgram::catalog(
        2,
        vec![
            SplitStep::GaussianX { b: g.clone() },
            SplitStep::Shear { target: 0, source: 1, alpha: -t.tanh() },
            SplitStep::GaussianFourier { b: a_t },
            SplitStep::GaussianX { b: g },
        ],
        kramers_fokker_planck_symbol(),
        t,
        "kramers_fokker_planck",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_symmetric_eigenvalue;

    fn residual(p: &SplittingProgram<f64>) -> f64 {
        let tf = p.target_flow().unwrap().unwrap();
        p.flow().unwrap().residual(&tf).relative
    }

    #[test]
    fn harmonic_coefficients_and_flow() {
        let p = harmonic_oscillator(0.5f64, 1).unwrap();
        assert_eq!(p.steps.len(), 3);
        match (&p.steps[0], &p.steps[1]) {
            (SplitStep::GaussianX { b }, SplitStep::GaussianFourier { b: f }) => {
                assert!((b[(0, 0)] - 0.5f64.tanh() / 2.0).abs() < 1e-16);
                assert!((f[(0, 0)] - 1f64.sinh() / 2.0).abs() < 1e-16);
            }
            _ => panic!("unexpected step kinds"),
        }
        assert!(residual(&p) < 1e-12);
        assert!(residual(&harmonic_oscillator(1.3f64, 3).unwrap()) < 1e-12);
        let zero = harmonic_oscillator(0.0f64, 2).unwrap();
        assert!(zero.steps.iter().all(|s| match s {
            SplitStep::GaussianX { b } | SplitStep::GaussianFourier { b } => b.norm() == 0.0,
            _ => false,
        }));
    }

    #[test]
    fn rotation_quarter_turn() {
        let p = rotation2d(std::f64::consts::FRAC_PI_2).unwrap();
        let alphas: Vec<f64> = p
            .steps
            .iter()
            .map(|s| match s {
                SplitStep::Shear { alpha, .. } => *alpha,
                _ => f64::NAN,
            })
            .collect();
        assert!((alphas[0] - 1.0).abs() < 1e-15 && (alphas[1] + 1.0).abs() < 1e-15 && (alphas[2] - 1.0).abs() < 1e-15);
        assert!(residual(&p) < 1e-12);
        let g = p.transport_matrix().unwrap();
        assert!((g - RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn rotation_refuses_near_pi() {
        assert!(matches!(rotation2d(3.1415f64), Err(SplitError::NearSingularAngle { .. })));
        assert_eq!(rotation2d(0.0f64).unwrap().transport_matrix().unwrap(), RMat::identity(2, 2));
    }

    #[test]
    fn dilatation_coefficients_at_two() {
        let (a, b, e) = dilatation_coefficients(2.0f64);
        assert!((a - 0.25).abs() < 1e-16 && (b - 0.5).abs() < 1e-16 && e == -1.0);
        let p = dilatation(2.0f64).unwrap();
        match &p.steps[4] {
            SplitStep::Scalar { gamma } => assert!((gamma.re.exp() - 2f64.powf(-0.5)).abs() < 1e-15),
            _ => panic!(),
        }
        for lam in [0.3, 0.9, 1.0, 1.7, 4.0] {
            assert!(residual(&dilatation(lam).unwrap()) < 1e-12, "lambda {lam}");
        }
        assert!(dilatation(0.0f64).is_err());
    }

    #[test]
    fn reflection_flow() {
        assert!(residual(&reflection1d::<f64>().unwrap()) < 1e-12);
    }

    #[test]
    fn fokker_planck_flow_and_positivity() {
        for t in [0.0, 0.05, 0.5, 1.0, 2.5] {
            let p = fokker_planck(t).unwrap();
            assert!(residual(&p) < 1e-10, "t = {t}: {}", residual(&p));
        }
        let mut t = 0.0;
        while t <= 5.0 {
            assert!(min_symmetric_eigenvalue(&fokker_planck_matrix(t)) >= -1e-12);
            t += 0.05;
        }
        assert!(fokker_planck(-0.1f64).is_err());
    }

    #[test]
    fn fokker_planck_exact_determinant() {
        for t in [0.1f64, 0.5, 1.0, 3.0] {
            let d = fokker_planck_matrix(t).determinant();
            assert!((d - fokker_planck_det_exact(t)).abs() < 1e-12 * d.abs().max(1.0), "t = {t}: {d} {}", fokker_planck_det_exact(t));
        }
    }

    #[test]
    fn kfp_flow_and_determinant() {
        for t in [0.0, 0.2, 1.0, 3.0] {
            let p = kramers_fokker_planck(t).unwrap();
            assert!(residual(&p) < 1e-10, "t = {t}: {}", residual(&p));
            let d = kramers_fokker_planck_matrix(t).determinant();
            assert!((d - kramers_fokker_planck_det_exact(t)).abs() < 1e-12 * d.abs().max(1.0), "t = {t}");
        }
    }

    #[test]
    fn step_counts() {
        assert_eq!(harmonic_oscillator(0.1f64, 1).unwrap().steps.len(), 3);
        assert_eq!(rotation2d(0.1f64).unwrap().count("shear"), 3);
        let d = dilatation(0.5f64).unwrap();
        assert_eq!(d.count("x_quadratic") + d.count("fourier_quadratic"), 4);
        assert_eq!(d.count("scalar"), 1);
        let f = fokker_planck(0.3f64).unwrap();
        assert_eq!((f.count("shear"), f.count("gaussian_fourier"), f.count("x_quadratic") + f.count("fourier_quadratic"), f.count("scalar")), (1, 1, 4, 1));
        assert_eq!(kramers_fokker_planck(0.3f64).unwrap().steps.len(), 4);
    }

    #[test]
    fn f32_harmonic_smoke() {
        let p = harmonic_oscillator(0.4f32, 1).unwrap();
        let tf = p.target_flow().unwrap().unwrap();
        assert!(p.flow().unwrap().residual(&tf).relative < 1e-5);
    }
}
