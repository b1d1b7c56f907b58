//! Polynomials of degree at most two on phase space.

use nalgebra::ComplexField;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SplitError};
use crate::linalg::{asymmetry, symmetrize, symplectic_j};
use crate::scalar::{cr, czero, lit, to_f64, tol, CMat, CVec, Real, RMat, RVec, C};

/// Ordering of the `2n + 2` coordinates of a homogenized symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinates {
    /// `(x_1..x_{n+1}, ξ_1..ξ_{n+1})`: the ordinary storage order in dimension `n + 1`.
    Storage,
    /// `(x_1..x_n, ξ_1..ξ_n, x_{n+1}, ξ_{n+1})`: original block first, auxiliary pair last.
    AuxiliaryLast,
}

/// `perm[b]` is the storage index of the `b`-th auxiliary-last coordinate (original dim `n`).
pub fn auxiliary_last_permutation(n: usize) -> Vec<usize> {
    let mut p = Vec::with_capacity(2 * n + 2);
    p.extend(0..n);
    p.extend((n + 1)..(2 * n + 1));
    p.push(n);
    p.push(2 * n + 1);
    p
}

/// Re-expresses a `(2n+2)` matrix given in storage order in the auxiliary-last order.
pub fn storage_to_auxiliary_last<T: Real>(m: &CMat<T>) -> CMat<T> {
    let n = m.nrows() / 2 - 1;
    let p = auxiliary_last_permutation(n);
    CMat::from_fn(m.nrows(), m.ncols(), |a, b| m[(p[a], p[b])])
}

pub fn auxiliary_last_to_storage<T: Real>(m: &CMat<T>) -> CMat<T> {
    let n = m.nrows() / 2 - 1;
    let p = auxiliary_last_permutation(n);
    let mut out = m.clone();
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            out[(p[a], p[b])] = m[(a, b)];
        }
    }
    out
}

/// `p(X) = XᵀQX + YᵀX + c` on `ℂ^{2n}`, `X = (x_1..x_n, ξ_1..ξ_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticSymbol<T: Real> {
    dim: usize,
    q: CMat<T>,
    y: CVec<T>,
    c: C<T>,
}

impl<T: Real> QuadraticSymbol<T> {
    /// Validating constructor: shapes must match and `Q` must be symmetric to 1e-13.
    pub fn new(dim: usize, q: CMat<T>, y: CVec<T>, c: C<T>) -> Result<Self> {
        Self::check_shapes(dim, &q, &y)?;
        let asym = asymmetry(&q);
        if asym > tol::<T>(1e-13) {
            return Err(SplitError::NotSymmetric { asymmetry: to_f64(asym) });
        }
        Self::check_finite(&q, &y, c)?;
        Ok(Self { dim, q: symmetrize(&q), y, c })
    }

    /// Ingest constructor: symmetrizes `Q`, logging a warning when the
    /// asymmetry exceeds 1e-13.
    pub fn symmetrized(dim: usize, q: CMat<T>, y: CVec<T>, c: C<T>) -> Result<Self> {
        Self::check_shapes(dim, &q, &y)?;
        Self::check_finite(&q, &y, c)?;
        let asym = asymmetry(&q);
        if asym > tol::<T>(1e-13) {
            log::warn!("symmetrizing quadratic part with asymmetry {:e}", to_f64(asym));
        }
        Ok(Self { dim, q: symmetrize(&q), y, c })
    }

    fn check_shapes(dim: usize, q: &CMat<T>, y: &CVec<T>) -> Result<()> {
        if dim == 0 {
            return Err(SplitError::ZeroDimension);
        }
        if q.nrows() != 2 * dim || q.ncols() != 2 * dim {
            return Err(SplitError::DimensionMismatch { expected: 2 * dim, found: q.nrows().max(q.ncols()) });
        }
        if y.len() != 2 * dim {
            return Err(SplitError::DimensionMismatch { expected: 2 * dim, found: y.len() });
        }
        Ok(())
    }

    fn check_finite(q: &CMat<T>, y: &CVec<T>, c: C<T>) -> Result<()> {
        let fin = |z: &C<T>| z.re.is_finite() && z.im.is_finite();
        if q.iter().all(fin) && y.iter().all(fin) && fin(&c) {
            Ok(())
        } else {
            Err(SplitError::NonFinite("symbol coefficients"))
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            q: CMat::from_element(2 * dim, 2 * dim, czero()),
            y: CVec::from_element(2 * dim, czero()),
            c: czero(),
        }
    }

    pub fn constant(dim: usize, c: C<T>) -> Self {
        Self { c, ..Self::zero(dim) }
    }

    pub fn linear(dim: usize, y: CVec<T>) -> Result<Self> {
        let z = Self::zero(dim);
        Self::new(dim, z.q, y, czero())
    }

    pub fn quadratic(dim: usize, q: CMat<T>) -> Result<Self> {
        let z = Self::zero(dim);
        Self::new(dim, q, z.y, czero())
    }

    /// Real coefficients.
    pub fn from_real(dim: usize, q: &RMat<T>, y: &RVec<T>, c: T) -> Result<Self> {
        Self::new(dim, q.map(cr), y.map(cr), cr(c))
    }

    /// The coordinate function `X_idx` (`idx < n` is `x_{idx+1}`, otherwise `ξ_{idx-n+1}`).
    pub fn coordinate(dim: usize, idx: usize) -> Self {
        let mut s = Self::zero(dim);
        s.y[idx] = cr(T::one());
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> &CMat<T> {
        &self.q
    }

    pub fn y(&self) -> &CVec<T> {
        &self.y
    }

    pub fn c(&self) -> C<T> {
        self.c
    }

    /// The same symbol with linear and constant parts dropped.
    pub fn homogeneous_part(&self) -> Self {
        Self { q: self.q.clone(), ..Self::zero(self.dim) }
    }

    pub fn scale(&self, z: C<T>) -> Self {
        Self { dim: self.dim, q: &self.q * z, y: &self.y * z, c: self.c * z }
    }

    pub fn scale_real(&self, t: T) -> Self {
        self.scale(cr(t))
    }

    pub fn eval(&self, x: &CVec<T>) -> C<T> {
        let qx = &self.q * x;
        let quad = x.iter().zip(qx.iter()).fold(czero::<T>(), |a, (u, v)| a + *u * *v);
        let lin = self.y.iter().zip(x.iter()).fold(czero::<T>(), |a, (u, v)| a + *u * *v);
        quad + lin + self.c
    }

    pub fn is_real(&self, eps: T) -> bool {
        self.q.iter().all(|z| z.im.abs() <= eps)
            && self.y.iter().all(|z| z.im.abs() <= eps)
            && self.c.im.abs() <= eps
    }

    /// Size of the coefficients, `sqrt(‖Q‖² + ‖Y‖² + |c|²)`.
    pub fn norm(&self) -> T {
        (self.q.iter().chain(self.y.iter()).fold(T::zero(), |a, z| a + z.norm_sqr()) + self.c.norm_sqr()).sqrt()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(SplitError::DimensionMismatch { expected: self.dim, found: other.dim })
        } else {
            Ok(())
        }
    }

    /// `{p1, p2} = Σ_j ∂_{ξ_j}p1 ∂_{x_j}p2 − ∂_{x_j}p1 ∂_{ξ_j}p2`.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let j = symplectic_j::<T>(self.dim);
        let two = cr(lit::<T>(2.0));
        let q1jq2 = &self.q * &j * &other.q;
        let q = (&q1jq2 + q1jq2.transpose()) * (-two);
        let y = (&self.q * &j * &other.y) * (-two) + (&other.q * &j * &self.y) * two;
        let jy2 = &j * &other.y;
        let c = -self.y.iter().zip(jy2.iter()).fold(czero(), |a, (u, v)| a + *u * *v);
        Ok(Self { dim: self.dim, q, y, c })
    }

    /// Homogenization `ℙp = XᵀQX + YᵀX·x_{n+1} + c·x_{n+1}²` as a purely quadratic
    /// symbol of dimension `n + 1` in storage order.
    pub fn homogenize(&self) -> Self {
        let n = self.dim;
        let map = |a: usize| if a < n { a } else { a + 1 };
        let half = cr(lit::<T>(0.5));
        let mut out = Self::zero(n + 1);
        for a in 0..2 * n {
            for b in 0..2 * n {
                out.q[(map(a), map(b))] = self.q[(a, b)];
            }
            out.q[(n, map(a))] = self.y[a] * half;
            out.q[(map(a), n)] = self.y[a] * half;
        }
        out.q[(n, n)] = self.c;
        out
    }

    /// Quadratic matrix of `ℙp` in the requested coordinate order.
    pub fn homogenized_matrix(&self, coords: Coordinates) -> CMat<T> {
        let h = self.homogenize().q;
        match coords {
            Coordinates::Storage => h,
            Coordinates::AuxiliaryLast => storage_to_auxiliary_last(&h),
        }
    }

    /// Inverse of [`homogenize`](Self::homogenize): recovers `p` from a quadratic
    /// symbol of dimension `n + 1` that does not involve `ξ_{n+1}`.
    pub fn dehomogenize(h: &Self, eps: T) -> Result<Self> {
        if h.dim < 2 {
            return Err(SplitError::InvalidParameter("homogenized symbol needs dimension at least 2".into()));
        }
        let n = h.dim - 1;
        let aux_xi = 2 * n + 1;
        let leak = h.q.column(aux_xi).iter().fold(T::zero(), |a, z| a.max(z.modulus()));
        if leak > eps || h.y.iter().any(|z| z.modulus() > eps) || h.c.modulus() > eps {
            return Err(SplitError::InvalidParameter("not in the image of the homogenization".into()));
        }
        let map = |a: usize| if a < n { a } else { a + 1 };
        let two = cr(lit::<T>(2.0));
        let q = CMat::from_fn(2 * n, 2 * n, |a, b| h.q[(map(a), map(b))]);
        let y = CVec::from_fn(2 * n, |a, _| h.q[(n, map(a))] * two);
        Self::symmetrized(n, q, y, h.q[(n, n)])
    }

    pub fn to_record(&self) -> SymbolRecord {
        let m = |f: &dyn Fn(&C<T>) -> T| -> Vec<Vec<f64>> {
            self.q.row_iter().map(|r| r.iter().map(|z| to_f64(f(z))).collect()).collect()
        };
        SymbolRecord {
            n: self.dim,
            q_re: m(&|z| z.re),
            q_im: m(&|z| z.im),
            y_re: self.y.iter().map(|z| to_f64(z.re)).collect(),
            y_im: self.y.iter().map(|z| to_f64(z.im)).collect(),
            c_re: to_f64(self.c.re),
            c_im: to_f64(self.c.im),
        }
    }

    /// Reads a record, symmetrizing `Q` (with a warning above 1e-13 asymmetry).
    pub fn from_record(r: &SymbolRecord) -> Result<Self> {
        let n2 = 2 * r.n;
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == n2 && m.iter().all(|row| row.len() == n2);
        let im_ok = r.q_im.is_empty() || rows_ok(&r.q_im);
        if !rows_ok(&r.q_re) || !im_ok || r.y_re.len() != n2 || !(r.y_im.is_empty() || r.y_im.len() == n2) {
            return Err(SplitError::Format(format!("symbol record shapes do not match n = {}", r.n)));
        }
        let q = CMat::from_fn(n2, n2, |i, j| {
            let im = if r.q_im.is_empty() { 0.0 } else { r.q_im[i][j] };
            C::new(lit(r.q_re[i][j]), lit(im))
        });
        let y = CVec::from_fn(n2, |i, _| {
            let im = if r.y_im.is_empty() { 0.0 } else { r.y_im[i] };
            C::new(lit(r.y_re[i]), lit(im))
        });
        Self::symmetrized(r.n, q, y, C::new(lit(r.c_re), lit(r.c_im)))
    }
}

impl<T: Real> Add for &QuadraticSymbol<T> {
    type Output = QuadraticSymbol<T>;
    fn add(self, o: Self) -> QuadraticSymbol<T> {
        assert_eq!(self.dim, o.dim, "symbol dimension mismatch");
        QuadraticSymbol { dim: self.dim, q: &self.q + &o.q, y: &self.y + &o.y, c: self.c + o.c }
    }
}

impl<T: Real> Sub for &QuadraticSymbol<T> {
    type Output = QuadraticSymbol<T>;
    fn sub(self, o: Self) -> QuadraticSymbol<T> {
        assert_eq!(self.dim, o.dim, "symbol dimension mismatch");
        QuadraticSymbol { dim: self.dim, q: &self.q - &o.q, y: &self.y - &o.y, c: self.c - o.c }
    }
}

impl<T: Real> Neg for &QuadraticSymbol<T> {
    type Output = QuadraticSymbol<T>;
    fn neg(self) -> QuadraticSymbol<T> {
        self.scale(cr(-T::one()))
    }
}

/// Text record of a symbol: row-major matrices, separate real and imaginary parts.
/// Missing imaginary parts read as zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub n: usize,
    pub q_re: Vec<Vec<f64>>,
    #[serde(default)]
    pub q_im: Vec<Vec<f64>>,
    pub y_re: Vec<f64>,
    #[serde(default)]
    pub y_im: Vec<f64>,
    #[serde(default)]
    pub c_re: f64,
    #[serde(default)]
    pub c_im: f64,
}
