//! Products of shears: elimination for `SL_n` and block factorization of
//! transports with zero-diagonal generators.

use crate::error::{Result, SplitError};
use crate::matfun::logm;
use crate::program::{Provenance, SplitStep, SplittingProgram};
use crate::scalar::{imag_part, real_part, to_complex, tol, Real, RMat};
use crate::splitter::generic::{generic_fixed_point, FixedPointOptions, SubspaceDecomposition};

use super::closed_form::transport_symbol;

/// Shears `G₁⋯G_m = G` for `G ∈ SL_n`, so that the program maps `u` to `u∘G`.
///
/// Row reduction to the identity using only operations `row_j += a·row_k`:
/// each pivot is set to one using the largest entry below it, then its column
/// is cleared. A zero column below a pivot different from one is first filled
/// by an auxiliary shear. At most `n² − 1` shears for generic input.
pub fn shear_factorize<T: Real>(g: &RMat<T>) -> Result<SplittingProgram<T>> {
    let n = g.nrows();
    if n == 0 || g.ncols() != n {
        return Err(SplitError::InvalidParameter("shear factorization needs a nonempty square matrix".into()));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(SplitError::NonFinite("matrix to factor"));
    }
    let det = g.determinant();
    if (det - T::one()).abs() > tol::<T>(1e-10) {
        return Err(SplitError::InvalidParameter(format!("determinant must be 1, got {det}")));
    }
    let scale = g.norm().max(T::one());
    let tiny = tol::<T>(1e-14) * scale;
    let mut w = g.clone();
    // row operations (target, source, a) applied in order
    let mut ops: Vec<(usize, usize, T)> = Vec::new();
    let row_op = |w: &mut RMat<T>, j: usize, k: usize, a: T, ops: &mut Vec<(usize, usize, T)>| {
        let rk = w.row(k).into_owned();
        let mut rj = w.row_mut(j);
        rj += rk * a;
        ops.push((j, k, a));
    };
    for col in 0..n {
        if col + 1 < n && (w[(col, col)] - T::one()).abs() > tiny {
            let (mut p, mut best) = (col + 1, T::zero());
            for r in (col + 1)..n {
                if w[(r, col)].abs() > best {
                    best = w[(r, col)].abs();
                    p = r;
                }
            }
            if best <= tiny {
                if w[(col, col)].abs() <= tiny {
                    return Err(SplitError::Singular("zero pivot column".into()));
                }
                row_op(&mut w, col + 1, col, T::one(), &mut ops);
                p = col + 1;
            }
            let a = (T::one() - w[(col, col)]) / w[(p, col)];
            row_op(&mut w, col, p, a, &mut ops);
        }
        if (w[(col, col)] - T::one()).abs() > tol::<T>(1e-8) * scale {
            return Err(SplitError::Singular(format!("pivot {col} could not be normalized")));
        }
        for r in 0..n {
            if r != col && w[(r, col)] != T::zero() {
                let a = -w[(r, col)];
                row_op(&mut w, r, col, a, &mut ops);
            }
        }
    }
    // E_m⋯E_1 G = I, hence G = E_1^{-1}⋯E_m^{-1}
    let steps: Vec<SplitStep<T>> = ops
        .iter()
        .map(|(j, k, a)| SplitStep::Shear { target: *j, source: *k, alpha: -*a })
        .collect();
    let target = match logm(&to_complex(g), 1e-8) {
        Ok(l) if imag_part(&l).norm() <= tol::<T>(1e-10) * l.norm().max(T::one()) => Some(transport_symbol(&real_part(&l))),
        _ => None,
    };
    SplittingProgram::new(n, steps, target, T::one(), Provenance::Catalog { name: "shear_factor".into() })
}

/// Coefficients of the block transport factorization, in the notation
/// `e^{tMᵀ} = (I + t yˡ⊗e_i) ∏_{k≠i} (I + t yᵏ⊗e_k) (I + t yʳ⊗e_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationBlocks<T: Real> {
    pub pivot: usize,
    pub left: Vec<T>,
    /// `(k, y^k)` in increasing `k`.
    pub middle: Vec<(usize, Vec<T>)>,
    pub right: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Transport `u ↦ u∘e^{tM}` for `M` with zero diagonal and a row `i` with no
/// zero off-diagonal entry, as `n + 1` blocks of commuting shears. The block
/// coefficients come from the generic fixed point applied to `Mᵀ`.
pub fn rotation_nd<T: Real>(m: &RMat<T>, t: T, opts: &FixedPointOptions) -> Result<SplittingProgram<T>> {
    let (prog, _) = rotation_nd_blocks(m, t, opts)?;
    Ok(prog)
}

pub fn rotation_nd_blocks<T: Real>(m: &RMat<T>, t: T, opts: &FixedPointOptions) -> Result<(SplittingProgram<T>, RotationBlocks<T>)> {
    let n = m.nrows();
    if n < 2 || m.ncols() != n {
        return Err(SplitError::InvalidParameter("rotation_nd needs a square matrix of size at least 2".into()));
    }
    if (0..n).any(|j| m[(j, j)] != T::zero()) {
        return Err(SplitError::AssumptionViolated("diagonal of M must vanish".into()));
    }
    let pivot = (0..n)
        .find(|&i| (0..n).all(|j| j == i || m[(i, j)] != T::zero()))
        .ok_or_else(|| SplitError::AssumptionViolated("no row of M has all off-diagonal entries nonzero".into()))?;
    let order: Vec<usize> = std::iter::once(pivot).chain((0..n).filter(|&k| k != pivot)).collect();
    let column_space = |k: usize| -> Vec<RMat<T>> {
        (0..n)
            .filter(|&r| r != k)
            .map(|r| {
                let mut e = RMat::zeros(n, n);
                e[(r, k)] = T::one();
                e
            })
            .collect()
    };
    let b = m.transpose();
    let b_star: Vec<RMat<T>> = order
        .iter()
        .map(|&k| {
            let mut e = RMat::zeros(n, n);
            e.set_column(k, &b.column(k));
            e
        })
        .collect();
    let dec = SubspaceDecomposition::new(order.iter().map(|&k| column_space(k)).collect(), column_space(pivot), b_star)?;
    let sol = generic_fixed_point(&dec, t, opts)?;
    let col = |a: &RMat<T>, k: usize| -> Vec<T> { a.column(k).iter().copied().collect() };
    let s_col = col(&sol.s, pivot);
    let bi = col(&sol.b[0], pivot);
    let left: Vec<T> = bi.iter().zip(s_col.iter()).map(|(a, s)| *a - *s).collect();
    let mut middle: Vec<(usize, Vec<T>)> = order[1..].iter().enumerate().map(|(q, &k)| (k, col(&sol.b[q + 1], k))).collect();
    middle.sort_by_key(|(k, _)| *k);

    // transpose of the factorization: (I + t e_k yᵀ) blocks, executed as [right, k descending, left]
    let mut steps = Vec::new();
    let push_block = |k: usize, y: &[T], steps: &mut Vec<SplitStep<T>>| {
        for (src, v) in y.iter().enumerate() {
            if src != k && *v != T::zero() {
                steps.push(SplitStep::Shear { target: k, source: src, alpha: t * *v });
            }
        }
    };
    push_block(pivot, &s_col, &mut steps);
    for (k, y) in middle.iter().rev() {
        push_block(*k, y, &mut steps);
    }
    push_block(pivot, &left, &mut steps);
    let prog = SplittingProgram::new(
        n,
        steps,
        Some(transport_symbol(m)),
        t,
        Provenance::Iteration { solver: "rotation_nd".into(), log: sol.log.clone() },
    )?;
    let blocks = RotationBlocks { pivot, left, middle, right: s_col, iterations: sol.iterations, residual: sol.residual };
    Ok((prog, blocks))
}
