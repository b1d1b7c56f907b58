//! Splittings involving linear symbols.

use crate::error::{Result, SplitError};
use crate::program::{SplitStep, SplittingProgram};
use crate::scalar::{cr, i_unit, lit, tol, Real, RVec, C};
use crate::symplectic::{lower_bound_decompose, QuadraticSymbol};
use crate::linalg::symplectic_j_real;

/// `e^{itℓ^w}` for a real affine form `ℓ(X) = Lᵀ X + c₀`: translations by
/// `tL_{n+j}`, then modulations by `tL_j`, then the constant
/// `e^{i t (c_t + c₀)}` with `c_t = (t/2) Σ_j L_j L_{n+j}`.
/// The target symbol is `−iℓ` at time `t`.
pub fn affine_linear_split<T: Real>(ell: &QuadraticSymbol<T>, t: T) -> Result<SplittingProgram<T>> {
    let eps = tol::<T>(1e-14);
    if ell.q().iter().any(|z| z.norm_sqr().sqrt() > eps) {
        return Err(SplitError::InvalidParameter("linear split needs a symbol without quadratic part".into()));
    }
    if !ell.is_real(eps) {
        return Err(SplitError::InvalidParameter("linear split needs a real symbol".into()));
    }
    let n = ell.dim();
    let l: Vec<T> = ell.y().iter().map(|z| z.re).collect();
    let mut steps = Vec::new();
    for j in 0..n {
        if l[n + j] != T::zero() {
            steps.push(SplitStep::Translate { axis: j, alpha: t * l[n + j] });
        }
    }
    for (j, lj) in l.iter().enumerate().take(n) {
        if *lj != T::zero() {
            steps.push(SplitStep::Modulate { axis: j, alpha: t * *lj });
        }
    }
    let ct = (0..n).fold(T::zero(), |a, j| a + l[j] * l[n + j]) * t * lit::<T>(0.5);
    let phase = t * (ct + ell.c().re);
    if phase != T::zero() {
        steps.push(SplitStep::Scalar { gamma: C::new(T::zero(), phase) });
    }
    let target = ell.scale(-i_unit::<T>());
    SplittingProgram::catalog(n, steps, target, t, "affine_linear")
}

/// `p = q(· − Y) + c` rewritten as a conjugation by a phase-space translation:
/// `e^{−p^w} = e^{−c} e^{−(iℓ)^w} e^{−q^w} e^{−(−iℓ)^w}` with `ℓ(X) = −(JY)ᵀX`.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationSplit<T: Real> {
    pub c: T,
    pub ell: QuadraticSymbol<T>,
    pub q: QuadraticSymbol<T>,
    pub shift: RVec<T>,
}

impl<T: Real> TranslationSplit<T> {
    /// Factor symbols in operator order (leftmost factor applied last).
    pub fn factor_symbols(&self) -> Vec<QuadraticSymbol<T>> {
        let n = self.q.dim();
        let i = i_unit::<T>();
        vec![
            QuadraticSymbol::constant(n, cr(self.c)),
            self.ell.scale(i),
            self.q.clone(),
            self.ell.scale(-i),
        ]
    }
}

pub fn translate_conjugate_split<T: Real>(p: &QuadraticSymbol<T>, eps: T) -> Result<TranslationSplit<T>> {
    let lb = lower_bound_decompose(p, eps)?;
    let n = p.dim();
    let jy = symplectic_j_real::<T>(n) * &lb.shift;
    let ell = QuadraticSymbol::from_real(n, &crate::scalar::RMat::zeros(2 * n, 2 * n), &(-jy), T::zero())?;
    if !lb.c.is_finite() {
        return Err(SplitError::NonFinite("infimum"));
    }
    Ok(TranslationSplit { c: lb.c, ell, q: lb.q, shift: lb.shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::RMat;
    use crate::symplectic::{affine_flow, compose_affine};

    fn residual(p: &SplittingProgram<f64>) -> f64 {
        let tf = p.target_flow().unwrap().unwrap();
        p.flow().unwrap().residual(&tf).relative
    }

    #[test]
    fn single_coordinate_cases() {
        let x = QuadraticSymbol::<f64>::coordinate(1, 0);
        let p = affine_linear_split(&x, 0.8).unwrap();
        assert_eq!(p.steps.len(), 1);
        assert_eq!(p.count("modulate"), 1);
        assert!(residual(&p) < 1e-14);
        let xi = QuadraticSymbol::<f64>::coordinate(1, 1);
        let p = affine_linear_split(&xi, 0.8).unwrap();
        assert_eq!(p.steps.len(), 1);
        assert_eq!(p.count("translate"), 1);
        assert!(residual(&p) < 1e-14);
    }

    #[test]
    fn mixed_form_phase() {
        let ell = QuadraticSymbol::<f64>::from_real(1, &RMat::zeros(2, 2), &RVec::from_vec(vec![1.0, 1.0]), 0.0).unwrap();
        let p = affine_linear_split(&ell, 1.0).unwrap();
        match p.steps.last().unwrap() {
            SplitStep::Scalar { gamma } => assert!((gamma.im - 0.5).abs() < 1e-16),
            _ => panic!("missing phase"),
        }
        assert!(residual(&p) < 1e-14);
        for t in [0.3, 2.0, -1.1] {
            assert!(residual(&affine_linear_split(&ell, t).unwrap()) < 1e-13, "t = {t}");
        }
        let ell2 = QuadraticSymbol::<f64>::from_real(2, &RMat::zeros(4, 4), &RVec::from_vec(vec![0.3, -1.2, 0.7, 2.0]), 0.4).unwrap();
        assert!(residual(&affine_linear_split(&ell2, 0.9).unwrap()) < 1e-13);
    }

    fn conj_residual(p: &QuadraticSymbol<f64>) -> f64 {
        let split = translate_conjugate_split(p, 1e-12).unwrap();
        let flows: Vec<_> = split.factor_symbols().iter().map(|s| affine_flow(s, 1.0).unwrap()).collect();
        compose_affine(&flows).unwrap().residual(&affine_flow(p, 1.0).unwrap()).relative
    }

    #[test]
    fn conjugation_by_translation() {
        // (x − 1)²
        let p = QuadraticSymbol::<f64>::from_real(1, &RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), &RVec::from_vec(vec![-2.0, 0.0]), 1.0).unwrap();
        let s = translate_conjugate_split(&p, 1e-12).unwrap();
        assert!(s.c.abs() < 1e-15);
        // ℓ = −(JY)ᵀX with Y = (1, 0): JY = (0, −1), so ℓ = ξ
        assert!((s.ell.y()[1].re - 1.0).abs() < 1e-15 && s.ell.y()[0].norm() < 1e-15);
        assert!(conj_residual(&p) < 1e-12);
        let centered = QuadraticSymbol::<f64>::from_real(1, &RMat::identity(2, 2), &RVec::zeros(2), 3.0).unwrap();
        let s = translate_conjugate_split(&centered, 1e-12).unwrap();
        assert!(s.ell.y().norm() == 0.0 && (s.c - 3.0).abs() < 1e-15);
    }
}
