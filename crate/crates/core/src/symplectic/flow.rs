//! Linear Hamiltonian flows `Φ_t^q = exp(−2itJQ)` and the nonnegative
//! complex symplectic test.

use crate::error::{Result, SplitError};
use crate::linalg::{hermitian_min_eigenvalue, identity, inverse, symplectic_j};
use crate::matfun::expm;
use crate::scalar::{all_finite, cr, fro, i_unit, lit, CMat, Real};
use crate::symplectic::symbol::QuadraticSymbol;

/// A `2n × 2n` complex matrix acting on phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMatrix<T: Real> {
    dim: usize,
    m: CMat<T>,
}

/// Outcome of the nonnegative symplectic membership test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpPlusCheck<T> {
    pub member: bool,
    /// `‖MᵀJM − J‖_F / max(1, ‖M‖_F²)`.
    pub symplectic_residual: T,
    /// Smallest eigenvalue of `M̄ᵀ(−iJ)M − (−iJ)`.
    pub margin: T,
}

impl<T: Real> FlowMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        Self { dim, m: identity(2 * dim) }
    }

    pub fn from_matrix(dim: usize, m: CMat<T>) -> Result<Self> {
        if m.nrows() != 2 * dim || m.ncols() != 2 * dim {
            return Err(SplitError::DimensionMismatch { expected: 2 * dim, found: m.nrows() });
        }
        if !all_finite(&m) {
            return Err(SplitError::NonFinite("flow matrix"));
        }
        Ok(Self { dim, m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.m
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(SplitError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(Self { dim: self.dim, m: &self.m * &other.m })
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self { dim: self.dim, m: inverse(&self.m)? })
    }

    /// `‖MᵀJM − J‖_F`.
    pub fn symplectic_residual_abs(&self) -> T {
        let j = symplectic_j::<T>(self.dim);
        fro(&(self.m.transpose() * &j * &self.m - j))
    }

    /// Symplecticity residual scaled by `max(1, ‖M‖_F²)`.
    pub fn symplectic_residual(&self) -> T {
        let scale = fro(&self.m);
        self.symplectic_residual_abs() / (scale * scale).max(T::one())
    }

    /// Nonnegative complex symplectic test: the scaled symplecticity residual is
    /// at most `tol` and `M̄ᵀ(−iJ)M − (−iJ)` has no eigenvalue below `−tol`.
    pub fn is_nonneg_symplectic(&self, tol: T) -> SpPlusCheck<T> {
        let mij = symplectic_j::<T>(self.dim) * (-i_unit::<T>());
        let h = self.m.adjoint() * &mij * &self.m - &mij;
        let margin = hermitian_min_eigenvalue(&h);
        let residual = self.symplectic_residual();
        SpPlusCheck { member: residual <= tol && margin >= -tol, symplectic_residual: residual, margin }
    }
}

/// `exp(−2itJQ)` for the quadratic part `Q` of `q`; the linear and constant
/// parts of `q` are ignored.
pub fn hamiltonian_flow<T: Real>(q: &QuadraticSymbol<T>, t: T) -> Result<FlowMatrix<T>> {
    if !t.is_finite() {
        return Err(SplitError::NonFinite("flow time"));
    }
    let n = q.dim();
    let gen = symplectic_j::<T>(n) * q.q() * (i_unit::<T>() * cr(lit::<T>(-2.0) * t));
    FlowMatrix::from_matrix(n, expm(&gen)?)
}
