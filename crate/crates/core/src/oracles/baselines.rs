use crate::error::Result;
use crate::program::{Provenance, SplitStep, SplittingProgram};
use crate::scalar::{lit, to_complex, RMat, Real};
use crate::symplectic::QuadraticSymbol;

/// Symmetric Strang composition `e^{−(t/2)a(x)} e^{−t b(ξ)} e^{−(t/2)a(x)}` for `p = xᵀAx + ξᵀBξ`.
///
/// It approximates `e^{−t p^w}` to second order in `t`; the target is recorded so
/// that verification reports the splitting defect.
pub fn strang<T: Real>(a: &RMat<T>, b: &RMat<T>, t: T) -> Result<SplittingProgram<T>> {
    let n = a.nrows();
    let half = lit::<T>(0.5);
    let mut q = crate::scalar::CMat::<T>::zeros(2 * n, 2 * n);
    q.view_mut((0, 0), (n, n)).copy_from(&to_complex(a));
    q.view_mut((n, n), (n, n)).copy_from(&to_complex(b));
    let target = QuadraticSymbol::quadratic(n, q)?;
    SplittingProgram::new(
        n,
        vec![
            SplitStep::GaussianX { b: a * (t * half) },
            SplitStep::GaussianFourier { b: b * t },
            SplitStep::GaussianX { b: a * (t * half) },
        ],
        Some(target),
        t,
        Provenance::Custom { note: "strang".into() },
    )
}

/// Strang splitting of the harmonic oscillator `|x|² − Δ`.
pub fn strang_harmonic<T: Real>(t: T, n: usize) -> Result<SplittingProgram<T>> {
    let id = RMat::<T>::identity(n, n);
    strang(&id, &id, t)
}
