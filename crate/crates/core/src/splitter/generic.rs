//! Fixed-point solver for exact splittings in a matrix Lie algebra.
//!
//! Given `b⋆ = b⋆₁ + … + b⋆ₘ` with `b⋆ⱼ ∈ 𝔟ⱼ` and a subspace `𝔰`, looks for
//! `bⱼ(t) ∈ 𝔟ⱼ` and `s(t) ∈ 𝔰` with
//! `e^{tb⋆} = e^{−ts} e^{tb₁} ⋯ e^{tbₘ} e^{ts}`.

use crate::error::{Result, SplitError};
use crate::linalg::{orthonormal_range, pinv_real, rank_real};
use crate::matfun::{expm, logm};
use crate::program::{digest, IterationRecord};
use crate::scalar::{imag_part, lit, real_part, to_complex, to_f64, tol, Real, RMat, RVec};

#[derive(Clone, Debug)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Minimal distance of the spectrum of the product from `ℝ₋` for the logarithm.
    pub log_guard: f64,
    /// On divergence, bisect `t` to report the largest convergent step.
    pub search_substep: bool,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200, log_guard: 1e-6, search_substep: true }
    }
}

/// Bases of `𝔟₁, …, 𝔟ₘ` and `𝔰` in the algebra of `d × d` real matrices,
/// with the components `b⋆ⱼ ∈ 𝔟ⱼ` of the target.
#[derive(Clone, Debug)]
pub struct SubspaceDecomposition<T: Real> {
    size: usize,
    b_spaces: Vec<Vec<RMat<T>>>,
    s_space: Vec<RMat<T>>,
    b_star: Vec<RMat<T>>,
}

fn vec_of<T: Real>(m: &RMat<T>) -> RVec<T> {
    RVec::from_column_slice(m.as_slice())
}

fn mat_of<T: Real>(v: &RVec<T>, d: usize) -> RMat<T> {
    RMat::from_column_slice(d, d, v.as_slice())
}

fn columns<T: Real>(mats: &[RMat<T>], d: usize) -> RMat<T> {
    let mut out = RMat::zeros(d * d, mats.len());
    for (k, m) in mats.iter().enumerate() {
        out.set_column(k, &vec_of(m));
    }
    out
}

fn bracket<T: Real>(a: &RMat<T>, b: &RMat<T>) -> RMat<T> {
    a * b - b * a
}

impl<T: Real> SubspaceDecomposition<T> {
    pub fn new(b_spaces: Vec<Vec<RMat<T>>>, s_space: Vec<RMat<T>>, b_star: Vec<RMat<T>>) -> Result<Self> {
        let size = b_star
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| SplitError::InvalidParameter("at least one subspace is required".into()))?;
        if b_spaces.len() != b_star.len() {
            return Err(SplitError::DimensionMismatch { expected: b_spaces.len(), found: b_star.len() });
        }
        let all = b_spaces.iter().flatten().chain(s_space.iter()).chain(b_star.iter());
        for m in all {
            if m.nrows() != size || m.ncols() != size {
                return Err(SplitError::DimensionMismatch { expected: size, found: m.nrows() });
            }
        }
        let flat: Vec<RMat<T>> = b_spaces.iter().flatten().cloned().collect();
        let bm = columns(&flat, size);
        if rank_real(&bm, tol::<T>(1e-12)) != flat.len() {
            return Err(SplitError::AssumptionViolated("the b-subspaces are not linearly independent".into()));
        }
        for (j, (space, comp)) in b_spaces.iter().zip(b_star.iter()).enumerate() {
            let basis = columns(space, size);
            let v = vec_of(comp);
            let coef = pinv_real(&basis, tol::<T>(1e-12)) * &v;
            let miss = (&basis * coef - &v).norm();
            if miss > tol::<T>(1e-12) * v.norm().max(T::one()) {
                return Err(SplitError::AssumptionViolated(format!(
                    "component {j} of the target is not in its subspace (distance {:e})",
                    to_f64(miss)
                )));
            }
        }
        Ok(Self { size, b_spaces, s_space, b_star })
    }

    /// Splits `target` into components along the b-subspaces.
    pub fn from_target(b_spaces: Vec<Vec<RMat<T>>>, s_space: Vec<RMat<T>>, target: &RMat<T>) -> Result<Self> {
        let d = target.nrows();
        let flat: Vec<RMat<T>> = b_spaces.iter().flatten().cloned().collect();
        let bm = columns(&flat, d);
        let coef = pinv_real(&bm, tol::<T>(1e-12)) * vec_of(target);
        let mut comps = Vec::new();
        let mut k = 0;
        for space in &b_spaces {
            let mut c = RMat::zeros(d, d);
            for m in space {
                c += m * coef[k];
                k += 1;
            }
            comps.push(c);
        }
        let recon = comps.iter().fold(RMat::zeros(d, d), |a, c| a + c);
        if (&recon - target).norm() > tol::<T>(1e-12) * target.norm().max(T::one()) {
            return Err(SplitError::AssumptionViolated("target is not in the sum of the b-subspaces".into()));
        }
        Self::new(b_spaces, s_space, comps)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn b_star(&self) -> RMat<T> {
        self.b_star.iter().fold(RMat::zeros(self.size, self.size), |a, c| a + c)
    }
}

/// Projections and the map `Ψ = Π_𝔯 ∘ ad_{b⋆}` restricted to `𝔰`.
struct Projector<T: Real> {
    d: usize,
    b_basis: RMat<T>,
    b_pinv: RMat<T>,
    counts: Vec<usize>,
    r_basis: RMat<T>,
    psi_pinv: RMat<T>,
    s_basis: RMat<T>,
}

impl<T: Real> Projector<T> {
    fn new(dec: &SubspaceDecomposition<T>) -> Result<Self> {
        let d = dec.size;
        let rc = tol::<T>(1e-10);
        let flat: Vec<RMat<T>> = dec.b_spaces.iter().flatten().cloned().collect();
        let b_basis = columns(&flat, d);
        let b_pinv = pinv_real(&b_basis, rc);
        let bstar = dec.b_star();
        let ads: Vec<RMat<T>> = dec.s_space.iter().map(|s| bracket(&bstar, s)).collect();
        let ad_cols = columns(&ads, d);
        let proj_b = &b_basis * &b_pinv;
        let complement = &ad_cols - &proj_b * &ad_cols;
        let scale = ad_cols.norm().max(T::one());
        let r_basis = if complement.ncols() == 0 || complement.norm() <= rc * scale {
            RMat::zeros(d * d, 0)
        } else {
            orthonormal_range(&complement, rc)
        };
        let psi = r_basis.transpose() * &ad_cols;
        if rank_real(&psi, rc) < r_basis.ncols() {
            return Err(SplitError::AssumptionViolated("Ψ is not invertible on the complement of its kernel".into()));
        }
        let psi_pinv = pinv_real(&psi, rc);
        Ok(Self {
            d,
            b_basis,
            b_pinv,
            counts: dec.b_spaces.iter().map(|s| s.len()).collect(),
            r_basis,
            psi_pinv,
            s_basis: columns(&dec.s_space, d),
        })
    }

    /// `(Π_𝔟 g split by subspace, coordinates of Π_𝔯 g, distance of g from 𝔟 ⊕ 𝔯)`.
    fn split(&self, g: &RMat<T>) -> (Vec<RMat<T>>, RVec<T>, T) {
        let v = vec_of(g);
        let rho = self.r_basis.transpose() * &v;
        let rest = &v - &self.r_basis * &rho;
        let beta = &self.b_pinv * &rest;
        let outside = (&rest - &self.b_basis * &beta).norm();
        let mut comps = Vec::with_capacity(self.counts.len());
        let mut k = 0;
        for &c in &self.counts {
            let part = self.b_basis.columns(k, c) * beta.rows(k, c);
            comps.push(mat_of(&part, self.d));
            k += c;
        }
        (comps, rho, outside)
    }

    /// `Ψ⁺ρ` as an element of `𝔰`.
    fn psi_inverse(&self, rho: &RVec<T>) -> RMat<T> {
        if rho.is_empty() {
            return RMat::zeros(self.d, self.d);
        }
        mat_of(&(&self.s_basis * (&self.psi_pinv * rho)), self.d)
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointSolution<T: Real> {
    /// `b₁(t), …, bₘ(t)`.
    pub b: Vec<RMat<T>>,
    pub s: RMat<T>,
    /// Initial value of `s`, the `t → 0` limit.
    pub s_star: RMat<T>,
    pub iterations: usize,
    /// Final `‖t⁻¹ log(e^{−ts}e^{tb₁}⋯e^{tbₘ}e^{ts}) − b⋆‖_F`.
    pub residual: T,
    pub log: Vec<IterationRecord>,
}

fn expm_real<T: Real>(a: &RMat<T>) -> Result<RMat<T>> {
    Ok(real_part(&expm(&to_complex(a))?))
}

/// `t⁻¹ log(e^{−ts} e^{tb₁} ⋯ e^{tbₘ} e^{ts})`.
pub fn product_generator<T: Real>(b: &[RMat<T>], s: &RMat<T>, t: T, guard: f64) -> Result<RMat<T>> {
    let mut p = expm_real(&(s * -t))?;
    for bj in b {
        p *= expm_real(&(bj * t))?;
    }
    p *= expm_real(&(s * t))?;
    let l = logm(&to_complex(&p), guard)?;
    if imag_part(&l).norm() > tol::<T>(1e-9) * l.norm().max(T::one()) {
        return Err(SplitError::LogBranch { distance: 0.0 });
    }
    Ok(real_part(&l) / t)
}

fn snapshot<T: Real>(b: &[RMat<T>], s: &RMat<T>) -> String {
    digest(b.iter().chain(std::iter::once(s)).flat_map(|m| m.iter().map(|v| to_f64(*v)).collect::<Vec<_>>()))
}

fn solve_once<T: Real>(dec: &SubspaceDecomposition<T>, proj: &Projector<T>, t: T, opts: &FixedPointOptions) -> Result<FixedPointSolution<T>> {
    let bstar = dec.b_star();
    let mut pair_sum = RMat::zeros(dec.size, dec.size);
    for i in 0..dec.b_star.len() {
        for j in (i + 1)..dec.b_star.len() {
            pair_sum += bracket(&dec.b_star[i], &dec.b_star[j]);
        }
    }
    let (_, rho0, outside0) = proj.split(&pair_sum);
    if outside0 > tol::<T>(1e-10) * pair_sum.norm().max(T::one()) {
        return Err(SplitError::AssumptionViolated(format!(
            "brackets of the target components leave b ⊕ r (distance {:e})",
            to_f64(outside0)
        )));
    }
    let s_star = proj.psi_inverse(&rho0) * lit::<T>(-0.5);
    let mut b = dec.b_star.clone();
    let mut s = s_star.clone();
    let mut log = Vec::new();
    if t == T::zero() {
        return Ok(FixedPointSolution { b, s, s_star, iterations: 0, residual: T::zero(), log });
    }
    let tolv = lit::<T>(opts.tol);
    let mut best = T::max_value().unwrap_or_else(T::one);
    let mut growth = 0;
    for k in 0..opts.max_iter {
        let g = product_generator(&b, &s, t, opts.log_guard)?;
        let res = (&g - &bstar).norm();
        log.push(IterationRecord { k, residual: to_f64(res), digest: snapshot(&b, &s) });
        if !res.is_finite() {
            break;
        }
        if res <= tolv {
            return Ok(FixedPointSolution { b, s, s_star, iterations: k, residual: res, log });
        }
        if res < best {
            best = res;
            growth = 0;
        } else {
            growth += 1;
            if growth >= 3 {
                break;
            }
        }
        let (comps, rho, outside) = proj.split(&g);
        if outside > lit::<T>(1e-6) * g.norm().max(T::one()) {
            return Err(SplitError::AssumptionViolated(format!(
                "generator leaves b ⊕ r (distance {:e}); the subspaces do not close",
                to_f64(outside)
            )));
        }
        for (j, c) in comps.iter().enumerate() {
            b[j] += &dec.b_star[j] - c;
        }
        s -= proj.psi_inverse(&rho) / t;
    }
    let last = log.last().map(|r| r.residual).unwrap_or(f64::NAN);
    Err(SplitError::Divergence { iterations: log.len(), residual: last, suggested_step: None })
}

/// Runs the fixed-point iteration. On divergence the error reports, when
/// `opts.search_substep` is set, the largest step `t/2^k` that converges.
pub fn generic_fixed_point<T: Real>(dec: &SubspaceDecomposition<T>, t: T, opts: &FixedPointOptions) -> Result<FixedPointSolution<T>> {
    if !t.is_finite() {
        return Err(SplitError::NonFinite("time step"));
    }
    let proj = Projector::new(dec)?;
    match solve_once(dec, &proj, t, opts) {
        Err(e @ (SplitError::Divergence { .. } | SplitError::LogBranch { .. })) => {
            let (iterations, residual) = match e {
                SplitError::Divergence { iterations, residual, .. } => (iterations, residual),
                _ => (0, f64::NAN),
            };
            let suggested_step =
                if opts.search_substep { largest_convergent_step(t, |h| solve_once(dec, &proj, h, opts).is_ok()) } else { None };
            Err(SplitError::Divergence { iterations, residual, suggested_step })
        }
        other => other,
    }
}

/// Halves `t` until `converges` holds (at most 30 times).
pub fn largest_convergent_step<T: Real>(t: T, mut converges: impl FnMut(T) -> bool) -> Option<f64> {
    let mut h = t;
    for _ in 0..30 {
        h *= lit::<T>(0.5);
        if converges(h) {
            return Some(to_f64(h));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, r: usize, c: usize) -> RMat<f64> {
        let mut m = RMat::zeros(d, d);
        m[(r, c)] = 1.0;
        m
    }

    fn sl2(t: f64) -> (SubspaceDecomposition<f64>, FixedPointSolution<f64>) {
        let dec = SubspaceDecomposition::new(
            vec![vec![unit(2, 0, 1)], vec![unit(2, 1, 0)]],
            vec![unit(2, 0, 1)],
            vec![unit(2, 0, 1), unit(2, 1, 0) * -1.0],
        )
        .unwrap();
        let sol = generic_fixed_point(&dec, t, &FixedPointOptions::default()).unwrap();
        (dec, sol)
    }

    #[test]
    fn sl2_matches_closed_form() {
        let t = 0.1;
        let (_, sol) = sl2(t);
        let b1 = sol.b[0][(0, 1)];
        let b2 = sol.b[1][(1, 0)];
        let s = sol.s[(0, 1)];
        assert!((b1 - 2.0 * (t / 2.0).tan() / t).abs() < 1e-12, "{b1} {} {s}", sol.b[1]);
        assert!((b2 + t.sin() / t).abs() < 1e-12, "{b2}");
        assert!((s - (t / 2.0).tan() / t).abs() < 1e-10, "{s}");
    }

    #[test]
    fn zero_time_returns_initial_point() {
        let (_, sol) = sl2(0.0);
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.b[0][(0, 1)], 1.0);
        // s⋆ = −½Ψ⁺Π_𝔯[b⋆₁, b⋆₂] with [E₁₂, −E₂₁] = −diag(1, −1) and Ψ(E₁₂) = diag(1, −1)... sign:
        // ad_{b⋆}(E₁₂) = [E₁₂ − E₂₁, E₁₂] = −[E₂₁, E₁₂] = diag(1, −1), so s⋆ = ½E₁₂.
        assert!((sol.s_star[(0, 1)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn commuting_spaces_converge_immediately() {
        let dec = SubspaceDecomposition::new(
            vec![vec![unit(3, 0, 0)], vec![unit(3, 1, 1)], vec![unit(3, 2, 2)]],
            vec![],
            vec![unit(3, 0, 0) * 0.4, unit(3, 1, 1) * -1.3, unit(3, 2, 2) * 2.0],
        )
        .unwrap();
        let sol = generic_fixed_point(&dec, 0.5, &FixedPointOptions::default()).unwrap();
        assert!(sol.iterations <= 1);
        assert!((sol.b[1][(1, 1)] + 1.3).abs() < 1e-13);
    }

    #[test]
    fn non_closing_decomposition_is_reported() {
        // 𝔰 = diagonal: ad_{b⋆}(𝔰) ⊂ 𝔟, leaving the bracket of the components uncovered
        let dec = SubspaceDecomposition::new(
            vec![vec![unit(2, 0, 1)], vec![unit(2, 1, 0)]],
            vec![unit(2, 0, 0) - unit(2, 1, 1)],
            vec![unit(2, 0, 1), unit(2, 1, 0) * -1.0],
        )
        .unwrap();
        assert!(matches!(generic_fixed_point(&dec, 0.1, &FixedPointOptions::default()), Err(SplitError::AssumptionViolated(_))));
    }

    #[test]
    fn reported_residual_is_reproducible() {
        let t = 0.3;
        let (dec, sol) = sl2(t);
        let g = product_generator(&sol.b, &sol.s, t, 1e-6).unwrap();
        let r = (g - dec.b_star()).norm();
        assert!((r - sol.residual).abs() < 1e-15 && r <= 1e-12);
    }
}
