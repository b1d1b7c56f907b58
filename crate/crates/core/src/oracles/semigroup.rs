use crate::error::{Result, SplitError};
use crate::linalg::hermitian_min_eigenvalue;
use crate::matfun::expm;
use crate::scalar::{lit, to_f64, CMat, CVec, Real, C};

use super::weyl::DenseOperator;

/// Largest admissible growth exponent `−t·λ_min(Re op)`.
const MAX_GROWTH: f64 = 600.0;

fn check_growth<T: Real>(op: &DenseOperator<T>, t: T) -> Result<()> {
    let h = (&op.matrix + op.matrix.adjoint()) * C::new(lit::<T>(0.5), T::zero());
    let t = to_f64(t);
    // ‖e^{−t·op}‖ ≤ e^{−t·λ} with λ the extreme eigenvalue of the Hermitian part on the relevant side
    let lower = if t >= 0.0 { to_f64(hermitian_min_eigenvalue(&h)) } else { -to_f64(hermitian_min_eigenvalue(&-h)) };
    let growth = -t * lower;
    if growth > MAX_GROWTH {
        return Err(SplitError::NotBoundedBelow(format!(
            "e^(−t·op) may grow like e^{growth:.1}; the real part of the discretization has eigenvalue {lower:e}"
        )));
    }
    Ok(())
}

/// `e^{−t·op}` by scaling and squaring.
pub fn dense_semigroup<T: Real>(op: &DenseOperator<T>, t: T) -> Result<CMat<T>> {
    check_growth(op, t)?;
    let e = expm(&(&op.matrix * C::new(-t, T::zero())))?;
    if !crate::scalar::all_finite(&e) {
        return Err(SplitError::NonFinite("dense semigroup"));
    }
    Ok(e)
}

/// `e^{−t·op} v` by Taylor series on substeps of 1-norm at most one, without forming the exponential.
pub fn dense_action<T: Real>(op: &DenseOperator<T>, t: T, v: &CVec<T>) -> Result<CVec<T>> {
    let m = &op.matrix;
    let norm = (0..m.ncols())
        .map(|j| m.column(j).iter().fold(0.0f64, |a, z| a + to_f64(z.norm_sqr()).sqrt()))
        .fold(0.0f64, f64::max);
    let steps = ((to_f64(t).abs() * norm).ceil() as usize).max(1);
    let h = C::new(-t / lit::<T>(steps as f64), T::zero());
    let mut out = v.clone();
    let eps = to_f64(T::default_epsilon());
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        let base = to_f64(acc.norm()).max(f64::MIN_POSITIVE);
        for k in 1..=60 {
            term = (m * &term) * (h / lit::<T>(k as f64));
            acc += &term;
            if to_f64(term.norm()) <= eps * 0.1 * base {
                break;
            }
        }
        out = acc;
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SplitError::NonFinite("dense action"));
    }
    Ok(out)
}
