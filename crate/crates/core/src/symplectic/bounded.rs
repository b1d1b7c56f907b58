//! Completing the square for real symbols bounded below.

use crate::error::{Result, SplitError};
use crate::linalg::{min_symmetric_eigenvalue, pinv_real};
use crate::scalar::{lit, real_part, to_f64, tol, Real, RMat, RVec};
use crate::symplectic::symbol::QuadraticSymbol;

/// `p(X) = q(X − Y) + c` with `q` the quadratic part of `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound<T: Real> {
    pub q: QuadraticSymbol<T>,
    pub shift: RVec<T>,
    pub c: T,
}

/// Writes a real symbol with positive semidefinite quadratic part as
/// `q(X − Y) + c`. The linear part `Z` must lie in the range of `Q`; then
/// `Y = −½Q⁺Z` and `c = p(Y) = inf p`.
pub fn lower_bound_decompose<T: Real>(p: &QuadraticSymbol<T>, eps: T) -> Result<LowerBound<T>> {
    if !p.is_real(eps) {
        return Err(SplitError::InvalidParameter("symbol must be real".into()));
    }
    let n = p.dim();
    let q = real_part(p.q());
    let z: RVec<T> = p.y().map(|v| v.re);
    let scale = q.norm().max(z.norm()).max(T::one());
    let lam = min_symmetric_eigenvalue(&q);
    if lam < -eps * scale {
        return Err(SplitError::NotBoundedBelow(format!("quadratic part has eigenvalue {:e}", to_f64(lam))));
    }
    let qp = pinv_real(&q, tol::<T>(1e-12));
    let y = &qp * &z * lit::<T>(-0.5);
    let miss = &q * &y * lit::<T>(2.0) + &z;
    if miss.norm() > eps * scale {
        return Err(SplitError::NotBoundedBelow(format!(
            "linear part has a component {:e} in the kernel of the quadratic part",
            to_f64(miss.norm())
        )));
    }
    let c = p.c().re - (y.transpose() * &q * &y)[(0, 0)];
    Ok(LowerBound {
        q: QuadraticSymbol::from_real(n, &q, &RVec::zeros(2 * n), T::zero())?,
        shift: y,
        c,
    })
}

impl<T: Real> LowerBound<T> {
    /// `q(X − Y) + c` expanded back into a symbol.
    pub fn reconstruct(&self) -> Result<QuadraticSymbol<T>> {
        let q: RMat<T> = real_part(self.q.q());
        let y = &q * &self.shift * lit::<T>(-2.0);
        let c = (self.shift.transpose() * &q * &self.shift)[(0, 0)] + self.c;
        QuadraticSymbol::from_real(self.q.dim(), &q, &y, c)
    }
}
