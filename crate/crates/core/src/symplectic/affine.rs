//! Flows of homogenized symbols as affine block data.
//!
//! In the auxiliary-last coordinates `(X, x_{n+1}, ξ_{n+1})` the flow of `ℙp`
//! has the double triangular shape
//!
//! ```text
//! [ A  B  0 ]
//! [ 0  1  0 ]
//! [ C  d  1 ]
//! ```
//!
//! with `A = Φ_t^q`. Products stay in this shape:
//! `(A₁,B₁,C₁,d₁)(A₂,B₂,C₂,d₂) = (A₁A₂, A₁B₂ + B₁, C₁A₂ + C₂, C₁B₂ + d₁ + d₂)`.

use crate::error::{Result, SplitError};
use crate::linalg::{block, symplectic_j, zeros};
use crate::matfun::phi_functions;
use crate::scalar::{cone, cr, czero, fro, fro_vec, i_unit, lit, to_f64, CMat, CVec, Real, C};
use crate::symplectic::flow::FlowMatrix;
use crate::symplectic::symbol::{auxiliary_last_to_storage, storage_to_auxiliary_last, Coordinates, QuadraticSymbol};

#[derive(Clone, Debug, PartialEq)]
pub struct AffineFlow<T: Real> {
    /// Block (1,1): the linear flow.
    pub linear: FlowMatrix<T>,
    /// Block (1,2), the column acting on `x_{n+1}`.
    pub column: CVec<T>,
    /// Block (3,1), stored as a vector (it is a row of the matrix).
    pub shift: CVec<T>,
    /// Block (3,2).
    pub phase: C<T>,
}

/// Blockwise Frobenius differences between two affine flows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineResidual<T> {
    pub linear: T,
    pub column: T,
    pub shift: T,
    pub phase: T,
    /// Full-matrix difference divided by `max(1, ‖reference‖_F)`.
    pub relative: T,
}

fn dot<T: Real>(a: &CVec<T>, b: &CVec<T>) -> C<T> {
    a.iter().zip(b.iter()).fold(czero(), |acc, (u, v)| acc + *u * *v)
}

impl<T: Real> AffineFlow<T> {
    pub fn identity(dim: usize) -> Self {
        Self {
            linear: FlowMatrix::identity(dim),
            column: CVec::from_element(2 * dim, czero()),
            shift: CVec::from_element(2 * dim, czero()),
            phase: czero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(SplitError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let a1 = self.linear.matrix();
        let a2 = other.linear.matrix();
        let shift = a2.transpose() * &self.shift + &other.shift;
        Ok(Self {
            linear: self.linear.compose(&other.linear)?,
            column: a1 * &other.column + &self.column,
            shift,
            phase: dot(&self.shift, &other.column) + self.phase + other.phase,
        })
    }

    /// Dense `(2n+2)` matrix in the requested coordinate order.
    pub fn to_dense(&self, coords: Coordinates) -> CMat<T> {
        let n2 = 2 * self.dim();
        let col = CMat::from_column_slice(n2, 1, self.column.as_slice());
        let row = CMat::from_row_slice(1, n2, self.shift.as_slice());
        let one = CMat::from_element(1, 1, cone());
        let zero11 = zeros::<T>(1, 1);
        let d = CMat::from_element(1, 1, self.phase);
        let zc = zeros::<T>(n2, 1);
        let zr = zeros::<T>(1, n2);
        let b = block(&[
            &[self.linear.matrix(), &col, &zc],
            &[&zr, &one, &zero11],
            &[&row, &d, &one],
        ]);
        match coords {
            Coordinates::AuxiliaryLast => b,
            Coordinates::Storage => auxiliary_last_to_storage(&b),
        }
    }

    /// Reads the blocks of a dense `(2n+2)` flow, checking the triangular shape to `eps`.
    pub fn from_dense(m: &CMat<T>, coords: Coordinates, eps: T) -> Result<Self> {
        if m.nrows() < 4 || m.nrows() % 2 != 0 || m.nrows() != m.ncols() {
            return Err(SplitError::DimensionMismatch { expected: 4, found: m.nrows() });
        }
        let b = match coords {
            Coordinates::AuxiliaryLast => m.clone(),
            Coordinates::Storage => storage_to_auxiliary_last(m),
        };
        let n2 = b.nrows() - 2;
        let mut off = T::zero();
        for k in 0..n2 {
            off = off.max(b[(k, n2 + 1)].norm_sqr()).max(b[(n2, k)].norm_sqr());
        }
        off = off.max(b[(n2, n2 + 1)].norm_sqr()).max((b[(n2, n2)] - cone()).norm_sqr()).max((b[(n2 + 1, n2 + 1)] - cone()).norm_sqr());
        if off.sqrt() > eps {
            return Err(SplitError::InvalidParameter(format!(
                "matrix is not an affine flow (structural defect {:e})",
                to_f64(off.sqrt())
            )));
        }
        Ok(Self {
            linear: FlowMatrix::from_matrix(n2 / 2, b.view((0, 0), (n2, n2)).into_owned())?,
            column: CVec::from_fn(n2, |k, _| b[(k, n2)]),
            shift: CVec::from_fn(n2, |k, _| b[(n2 + 1, k)]),
            phase: b[(n2 + 1, n2)],
        })
    }

    pub fn residual(&self, reference: &Self) -> AffineResidual<T> {
        let full = fro(&(self.to_dense(Coordinates::AuxiliaryLast) - reference.to_dense(Coordinates::AuxiliaryLast)));
        let denom = fro(&reference.to_dense(Coordinates::AuxiliaryLast)).max(T::one());
        AffineResidual {
            linear: fro(&(self.linear.matrix() - reference.linear.matrix())),
            column: fro_vec(&(&self.column - &reference.column)),
            shift: fro_vec(&(&self.shift - &reference.shift)),
            phase: (self.phase - reference.phase).norm_sqr().sqrt(),
            relative: full / denom,
        }
    }
}

/// Flow at time `t` of the homogenized symbol `ℙp`, assembled from
/// `Υ = φ₁(−2itJQ)` and `Θ = φ₂(−2itJQ)` (`φ₁(z) = (e^z−1)/z`, `φ₂(z) = (e^z−1−z)/z²`):
/// `B = −iΥJL`, `C = iLΥ`, `d = LΘJL + 2ic`, with `(L, c) = t(Y, c)`.
pub fn affine_flow<T: Real>(p: &QuadraticSymbol<T>, t: T) -> Result<AffineFlow<T>> {
    if !t.is_finite() {
        return Err(SplitError::NonFinite("flow time"));
    }
    let n = p.dim();
    let j = symplectic_j::<T>(n);
    let ps = p.scale_real(t);
    let i = i_unit::<T>();
    let z = &j * ps.q() * (i * cr(lit::<T>(-2.0)));
    let (e, ups, theta) = phi_functions(&z)?;
    let l = ps.y();
    let jl = &j * l;
    let column = &ups * &jl * (-i);
    let shift = ups.transpose() * l * i;
    let phase = dot(l, &(&theta * &jl)) + ps.c() * i * cr(lit::<T>(2.0));
    Ok(AffineFlow { linear: FlowMatrix::from_matrix(n, e)?, column, shift, phase })
}

/// `κ = Σ_{m≥0} 4^m/(2m+3)! · wₘᵀQwₘ` with `wₘ = (JQ)^m J Y`, so that the
/// phase block of the time-one flow is `2i(κ + c)`.
pub fn kappa_series<T: Real>(p: &QuadraticSymbol<T>) -> Result<C<T>> {
    let j = symplectic_j::<T>(p.dim());
    let jq = &j * p.q();
    let mut w = &j * p.y();
    let mut coeff = lit::<T>(1.0 / 6.0);
    let mut sum = czero::<T>();
    let mut peak = T::zero();
    let eps = T::default_epsilon();
    for m in 0..400usize {
        let term = dot(&w, &(p.q() * &w)) * cr(coeff);
        if !(term.re.is_finite() && term.im.is_finite()) {
            return Err(SplitError::SeriesDivergence { terms: m });
        }
        sum += term;
        let mag = term.norm_sqr().sqrt();
        peak = peak.max(mag);
        if m > 2 && mag <= eps * sum.norm_sqr().sqrt().max(eps) {
            // terms before the peak may cancel catastrophically
            if peak > lit::<T>(1e8) * sum.norm_sqr().sqrt().max(T::one()) {
                return Err(SplitError::SeriesDivergence { terms: m });
            }
            return Ok(sum);
        }
        if mag == T::zero() && m > 0 && w.iter().all(|z| z.norm_sqr() == T::zero()) {
            return Ok(sum);
        }
        w = &jq * &w;
        let k = lit::<T>(m as f64);
        coeff = coeff * lit::<T>(4.0) / ((lit::<T>(2.0) * k + lit::<T>(4.0)) * (lit::<T>(2.0) * k + lit::<T>(5.0)));
    }
    Err(SplitError::SeriesDivergence { terms: 400 })
}

/// Product `F₁·F₂⋯F_m` of affine flows.
pub fn compose_affine<T: Real>(flows: &[AffineFlow<T>]) -> Result<AffineFlow<T>> {
    let first = flows.first().ok_or_else(|| SplitError::InvalidParameter("no flows to compose".into()))?;
    let mut acc = first.clone();
    for f in &flows[1..] {
        acc = acc.compose(f)?;
    }
    Ok(acc)
}

/// Cross terms `σ_j` of the phase of a product: the phase of `F₁⋯F_m` equals
/// `Σ_j (d_j + 2iσ_j)` where `2iσ_j = C_{<j}·B_j` and `C_{<j}` is the shift of `F₁⋯F_{j−1}`.
pub fn phase_cross_terms<T: Real>(flows: &[AffineFlow<T>]) -> Result<Vec<C<T>>> {
    let mut out = Vec::with_capacity(flows.len());
    if flows.is_empty() {
        return Ok(out);
    }
    let two_i = i_unit::<T>() * cr(lit::<T>(2.0));
    let mut acc = AffineFlow::identity(flows[0].dim());
    for f in flows {
        out.push(dot(&acc.shift, &f.column) / two_i);
        acc = acc.compose(f)?;
    }
    Ok(out)
}
