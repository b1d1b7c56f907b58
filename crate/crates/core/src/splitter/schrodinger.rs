//! Exact splitting of magnetic Schrödinger semigroups with quadratic potential,
//! `e^{−it(−Δ/2 + xᵀVx − i Bx·∇)}` for symmetric `V` and skew `B`.
//!
//! The program is, in execution order,
//! `e^{−it v_r(x)}`, shears from the rows of `L` (last row first),
//! `e^{it a(∇)}`, shears from the rows of `U` (last row first),
//! `e^{−it v_ℓ(x)}`, with `L` strictly lower, `U` strictly upper and `v_ℓ` diagonal.

use crate::error::{Result, SplitError};
use crate::linalg::symplectic_j_real;
use crate::matfun::logm;
use crate::program::{digest, IterationRecord, Provenance, SplitStep, SplittingProgram};
use crate::scalar::{lit, real_part, to_complex, to_f64, tol, CMat, Real, RMat, C};
use crate::splitter::generic::{largest_convergent_step, FixedPointOptions};
use crate::symplectic::QuadraticSymbol;

#[derive(Clone, Debug)]
pub struct SchrodingerCoefficients<T: Real> {
    pub v_ell: RMat<T>,
    pub u: RMat<T>,
    pub a: RMat<T>,
    pub l: RMat<T>,
    pub v_r: RMat<T>,
    pub t: T,
    pub iterations: usize,
    /// Flow residual of the returned program.
    pub residual: T,
    /// Frobenius norm of the coefficient update at each iteration.
    pub update_norms: Vec<f64>,
    pub log: Vec<IterationRecord>,
    pub target: QuadraticSymbol<T>,
}

/// `i(|ξ|²/2 + xᵀVx + Bx·ξ)`.
pub fn schrodinger_symbol<T: Real>(v: &RMat<T>, b: &RMat<T>) -> Result<QuadraticSymbol<T>> {
    let n = v.nrows();
    let h = lit::<T>(0.5);
    let mut q = CMat::<T>::from_element(2 * n, 2 * n, C::new(T::zero(), T::zero()));
    for r in 0..n {
        for c in 0..n {
            q[(r, c)] = C::new(T::zero(), v[(r, c)]);
            q[(n + r, c)] = C::new(T::zero(), b[(r, c)] * h);
            q[(c, n + r)] = C::new(T::zero(), b[(r, c)] * h);
        }
        q[(n + r, n + r)] = C::new(T::zero(), h);
    }
    QuadraticSymbol::symmetrized(n, q, crate::scalar::CVec::from_element(2 * n, C::new(T::zero(), T::zero())), C::new(T::zero(), T::zero()))
}

fn strict_lower<T: Real>(m: &RMat<T>) -> RMat<T> {
    RMat::from_fn(m.nrows(), m.ncols(), |r, c| if r > c { m[(r, c)] } else { T::zero() })
}

fn strict_upper<T: Real>(m: &RMat<T>) -> RMat<T> {
    RMat::from_fn(m.nrows(), m.ncols(), |r, c| if r < c { m[(r, c)] } else { T::zero() })
}

fn diagonal<T: Real>(m: &RMat<T>) -> RMat<T> {
    RMat::from_fn(m.nrows(), m.ncols(), |r, c| if r == c { m[(r, c)] } else { T::zero() })
}

fn row_only<T: Real>(m: &RMat<T>, j: usize) -> RMat<T> {
    RMat::from_fn(m.nrows(), m.ncols(), |r, c| if r == j { m[(r, c)] } else { T::zero() })
}

fn blocks<T: Real>(a: &RMat<T>, b: &RMat<T>, c: &RMat<T>, d: &RMat<T>) -> RMat<T> {
    let n = a.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

/// Program steps for given coefficients.
pub fn schrodinger_steps<T: Real>(v_ell: &RMat<T>, u: &RMat<T>, a: &RMat<T>, l: &RMat<T>, v_r: &RMat<T>, t: T) -> Vec<SplitStep<T>> {
    let n = a.nrows();
    let mut steps = vec![SplitStep::XQuadratic { a: v_r * -t }];
    for j in (1..n).rev() {
        for k in 0..j {
            if l[(j, k)] != T::zero() {
                steps.push(SplitStep::Shear { target: j, source: k, alpha: -t * l[(j, k)] });
            }
        }
    }
    steps.push(SplitStep::FourierQuadratic { a: a * t });
    for j in (0..n.saturating_sub(1)).rev() {
        for k in (j + 1)..n {
            if u[(j, k)] != T::zero() {
                steps.push(SplitStep::Shear { target: j, source: k, alpha: -t * u[(j, k)] });
            }
        }
    }
    steps.push(SplitStep::XQuadratic { a: v_ell * -t });
    steps
}

impl<T: Real> SchrodingerCoefficients<T> {
    pub fn program(&self) -> Result<SplittingProgram<T>> {
        SplittingProgram::new(
            self.a.nrows(),
            schrodinger_steps(&self.v_ell, &self.u, &self.a, &self.l, &self.v_r, self.t),
            Some(self.target.clone()),
            self.t,
            Provenance::Iteration { solver: "schrodinger".into(), log: self.log.clone() },
        )
    }
}

fn flow_residual<T: Real>(steps: Vec<SplitStep<T>>, target: &QuadraticSymbol<T>, t: T) -> Result<T> {
    let n = target.dim();
    let prog = SplittingProgram::new(n, steps, Some(target.clone()), t, Provenance::Custom { note: String::new() })?;
    let tf = prog.target_flow()?.expect("target present");
    Ok(prog.flow()?.residual(&tf).relative)
}

pub fn schrodinger_coefficients<T: Real>(v: &RMat<T>, b: &RMat<T>, t: T, opts: &FixedPointOptions) -> Result<SchrodingerCoefficients<T>> {
    let n = v.nrows();
    if n == 0 || v.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(SplitError::InvalidParameter("V and B must be square of the same size".into()));
    }
    if !t.is_finite() {
        return Err(SplitError::NonFinite("time step"));
    }
    let skew = (b + b.transpose()).norm();
    if skew > tol::<T>(1e-12) {
        return Err(SplitError::InvalidParameter(format!("B must be skew-symmetric (‖B + Bᵀ‖ = {:e})", to_f64(skew))));
    }
    if crate::linalg::real_asymmetry(v) > tol::<T>(1e-13) * v.norm().max(T::one()) {
        return Err(SplitError::NotSymmetric { asymmetry: to_f64(crate::linalg::real_asymmetry(v)) });
    }
    match iterate(v, b, t, opts) {
        Err(e @ (SplitError::Divergence { .. } | SplitError::LogBranch { .. })) => {
            let (iterations, residual) = match e {
                SplitError::Divergence { iterations, residual, .. } => (iterations, residual),
                _ => (0, f64::NAN),
            };
            let suggested_step =
                if opts.search_substep { largest_convergent_step(t, |h| iterate(v, b, h, opts).is_ok()) } else { None };
            Err(SplitError::Divergence { iterations, residual, suggested_step })
        }
        other => other,
    }
}

fn iterate<T: Real>(v: &RMat<T>, b: &RMat<T>, t: T, opts: &FixedPointOptions) -> Result<SchrodingerCoefficients<T>> {
    let n = v.nrows();
    let id = RMat::<T>::identity(n, n);
    let z = RMat::<T>::zeros(n, n);
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let lb = strict_lower(b);
    let ub = strict_upper(b);
    let target = schrodinger_symbol(v, b)?;
    let mut a = &id * half;
    let mut l = lb.clone();
    let mut u = ub.clone();
    let mut vm = v.clone();
    let mut d = RMat::<T>::zeros(n, n);
    let mut log = Vec::new();
    let mut norms = Vec::new();
    let finish = |a: RMat<T>, l: RMat<T>, u: RMat<T>, vm: &RMat<T>, d: &RMat<T>, k: usize, res: T, norms: Vec<f64>, log: Vec<IterationRecord>| SchrodingerCoefficients {
        v_ell: d * -half,
        v_r: vm + d * half,
        u,
        a,
        l,
        t,
        iterations: k,
        residual: res,
        update_norms: norms,
        log,
        target: target.clone(),
    };
    if t == T::zero() {
        return Ok(finish(a, l, u, &vm, &d, 0, T::zero(), norms, log));
    }
    let j = symplectic_j_real::<T>(n);
    let tolv = lit::<T>(opts.tol);
    let mut best = T::max_value().unwrap_or_else(T::one);
    let mut growth = 0;
    for k in 0..opts.max_iter {
        let mut p = RMat::<T>::identity(2 * n, 2 * n);
        for jr in 0..n.saturating_sub(1) {
            let w = row_only(&u, jr);
            p *= blocks(&(&id + &w * t), &z, &z, &(&id - w.transpose() * t));
        }
        p *= blocks(&id, &(&a * (two * t)), &z, &id);
        for jr in 1..n {
            let w = row_only(&l, jr);
            p *= blocks(&(&id + &w * t), &z, &z, &(&id - w.transpose() * t));
        }
        p *= blocks(&id, &z, &(&vm * (-two * t)), &id);
        let lg = real_part(&logm(&to_complex(&p), opts.log_guard)?);
        let g = &j * lg * (-T::one() / t);
        let vt = g.view((0, 0), (n, n)) * half;
        let m = g.view((n, 0), (n, n)).into_owned();
        let at = g.view((n, n), (n, n)) * half;
        d = diagonal(&m) / t;
        let lt = strict_lower(&m);
        let ut = strict_upper(&m);

        let res = flow_residual(schrodinger_steps(&(&d * -half), &u, &a, &l, &(&vm + &d * half), t), &target, t)?;
        let snap = digest(a.iter().chain(l.iter()).chain(u.iter()).chain(vm.iter()).map(|x| to_f64(*x)));
        if res <= tolv {
            log.push(IterationRecord { k, residual: to_f64(res), digest: snap });
            return Ok(finish(a, l, u, &vm, &d, k, res, norms, log));
        }
        let da = &id * half - at;
        let dl = &lb - lt;
        let du = &ub - ut;
        let dv = v - vt + (&d * b - b * &d) * (t * half) + &d * &d * (t * t * half);
        let un = (da.norm_squared() + dl.norm_squared() + du.norm_squared() + dv.norm_squared()).sqrt();
        norms.push(to_f64(un));
        log.push(IterationRecord { k, residual: to_f64(un), digest: snap });
        if !un.is_finite() {
            break;
        }
        if un < best {
            best = un;
            growth = 0;
        } else {
            growth += 1;
            if growth >= 3 {
                break;
            }
        }
        a += da;
        l += dl;
        u += du;
        vm += dv;
    }
    let last = log.last().map(|r| r.residual).unwrap_or(f64::NAN);
    Err(SplitError::Divergence { iterations: log.len(), residual: last, suggested_step: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_initial_state() {
        let v = RMat::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]);
        let b = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let c = schrodinger_coefficients(&v, &b, 0.0, &FixedPointOptions::default()).unwrap();
        assert_eq!(c.a, RMat::identity(2, 2) * 0.5);
        assert_eq!(&c.l + &c.u, b);
        assert_eq!(c.v_r, v);
        assert_eq!(c.v_ell, RMat::zeros(2, 2));
    }

    #[test]
    fn one_dimensional_closed_form() {
        let t = 0.7f64;
        let c = schrodinger_coefficients(&RMat::from_element(1, 1, 0.5), &RMat::zeros(1, 1), t, &FixedPointOptions::default()).unwrap();
        assert!((c.a[(0, 0)] - t.sin() / (2.0 * t)).abs() < 1e-12);
        let w = (t / 2.0).tan() / (2.0 * t);
        assert!((c.v_ell[(0, 0)] - w).abs() < 1e-12 && (c.v_r[(0, 0)] - w).abs() < 1e-12);
        assert!(c.residual <= 1e-12);
    }

    #[test]
    fn magnetic_two_dimensional() {
        let v = RMat::identity(2, 2);
        let b = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let c = schrodinger_coefficients(&v, &b, 0.1, &FixedPointOptions::default()).unwrap();
        assert!(c.iterations < 60);
        assert!(c.residual <= 1e-12);
        // structural zeros
        assert!(c.u[(1, 0)] == 0.0 && c.u[(0, 0)] == 0.0 && c.l[(0, 1)] == 0.0 && c.l[(1, 1)] == 0.0);
        assert!(c.v_ell[(0, 1)] == 0.0 && c.v_ell[(1, 0)] == 0.0);
        let prog = c.program().unwrap();
        let tf = prog.target_flow().unwrap().unwrap();
        assert!(prog.flow().unwrap().residual(&tf).relative <= 1e-12);
    }

    #[test]
    fn rejects_non_skew_b() {
        let v = RMat::identity(2, 2);
        let b = RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(schrodinger_coefficients(&v, &b, 0.1, &FixedPointOptions::default()), Err(SplitError::InvalidParameter(_))));
    }
}
