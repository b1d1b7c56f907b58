//! Elementary exponential factors and programs built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SplitError};
use crate::linalg::{min_symmetric_eigenvalue, real_asymmetry};
use crate::scalar::{cr, i_unit, lit, to_f64, tol, Real, RMat, C};
use crate::symplectic::{affine_flow, compose_affine, AffineFlow, QuadraticSymbol, SymbolRecord};

/// One elementary factor. Indices are zero-based. Each factor is the operator
/// `e^{−s^w}` for the symbol `s` returned by [`SplitStep::symbol`].
#[derive(Clone, Debug, PartialEq)]
pub enum SplitStep<T: Real> {
    /// `e^{α∂_j}`: `u ↦ u(· + α e_j)`.
    Translate { axis: usize, alpha: T },
    /// `e^{iαx_j}`.
    Modulate { axis: usize, alpha: T },
    /// `e^{i a(∇)}`, the Fourier multiplier `e^{−i a(ξ)}`.
    FourierQuadratic { a: RMat<T> },
    /// `e^{i a(x)}`.
    XQuadratic { a: RMat<T> },
    /// `e^{α x_k ∂_j}`: `u ↦ u(x + α x_k e_j)`, with `j = target`, `k = source`.
    Shear { target: usize, source: usize, alpha: T },
    /// `e^{−b(x)}`.
    GaussianX { b: RMat<T> },
    /// `e^{b(∇)}`, the Fourier multiplier `e^{−b(ξ)}`.
    GaussianFourier { b: RMat<T> },
    /// `e^{γ}`.
    Scalar { gamma: C<T> },
}

impl<T: Real> SplitStep<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            SplitStep::Translate { .. } => "translate",
            SplitStep::Modulate { .. } => "modulate",
            SplitStep::FourierQuadratic { .. } => "fourier_quadratic",
            SplitStep::XQuadratic { .. } => "x_quadratic",
            SplitStep::Shear { .. } => "shear",
            SplitStep::GaussianX { .. } => "gaussian_x",
            SplitStep::GaussianFourier { .. } => "gaussian_fourier",
            SplitStep::Scalar { .. } => "scalar",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let idx = |j: usize| {
            if j < n {
                Ok(())
            } else {
                Err(SplitError::InvalidParameter(format!("axis {j} out of range for dimension {n}")))
            }
        };
        let sym = |a: &RMat<T>| {
            if a.nrows() != n || a.ncols() != n {
                return Err(SplitError::DimensionMismatch { expected: n, found: a.nrows() });
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(SplitError::NonFinite("step coefficients"));
            }
            let asym = real_asymmetry(a);
            if asym > tol::<T>(1e-13) * a.norm().max(T::one()) {
                return Err(SplitError::NotSymmetric { asymmetry: to_f64(asym) });
            }
            Ok(())
        };
        let fin = |v: T| if v.is_finite() { Ok(()) } else { Err(SplitError::NonFinite("step coefficient")) };
        match self {
            SplitStep::Translate { axis, alpha } | SplitStep::Modulate { axis, alpha } => {
                idx(*axis)?;
                fin(*alpha)
            }
            SplitStep::FourierQuadratic { a } | SplitStep::XQuadratic { a } => sym(a),
            SplitStep::Shear { target, source, alpha } => {
                idx(*target)?;
                idx(*source)?;
                if target == source {
                    return Err(SplitError::InvalidParameter("shear needs distinct target and source axes".into()));
                }
                fin(*alpha)
            }
            SplitStep::GaussianX { b } | SplitStep::GaussianFourier { b } => {
                sym(b)?;
                let lam = min_symmetric_eigenvalue(b);
                if lam < -tol::<T>(1e-12) {
                    return Err(SplitError::InvalidParameter(format!(
                        "gaussian factor needs a positive semidefinite matrix (eigenvalue {:e})",
                        to_f64(lam)
                    )));
                }
                Ok(())
            }
            SplitStep::Scalar { gamma } => {
                if gamma.re.is_finite() && gamma.im.is_finite() {
                    Ok(())
                } else {
                    Err(SplitError::NonFinite("scalar step"))
                }
            }
        }
    }

    /// The symbol `s` with `step = e^{−s^w}`.
    pub fn symbol(&self, n: usize) -> QuadraticSymbol<T> {
        let mut q = crate::scalar::CMat::<T>::from_element(2 * n, 2 * n, crate::scalar::czero());
        let mut y = crate::scalar::CVec::<T>::from_element(2 * n, crate::scalar::czero());
        let mut c = crate::scalar::czero::<T>();
        let i = i_unit::<T>();
        let put = |q: &mut crate::scalar::CMat<T>, off: usize, a: &RMat<T>, z: C<T>| {
            for r in 0..n {
                for s in 0..n {
                    q[(off + r, off + s)] = z * cr(a[(r, s)]);
                }
            }
        };
        match self {
            SplitStep::Translate { axis, alpha } => y[n + axis] = -i * cr(*alpha),
            SplitStep::Modulate { axis, alpha } => y[*axis] = -i * cr(*alpha),
            SplitStep::FourierQuadratic { a } => put(&mut q, n, a, i),
            SplitStep::XQuadratic { a } => put(&mut q, 0, a, -i),
            SplitStep::Shear { target, source, alpha } => {
                let v = -i * cr(*alpha * lit::<T>(0.5));
                q[(*source, n + target)] = v;
                q[(n + target, *source)] = v;
            }
            SplitStep::GaussianX { b } => put(&mut q, 0, b, cr(T::one())),
            SplitStep::GaussianFourier { b } => put(&mut q, n, b, cr(T::one())),
            SplitStep::Scalar { gamma } => c = -*gamma,
        }
        QuadraticSymbol::new(n, q, y, c).expect("step symbols are symmetric by construction")
    }

    /// Whether the step needs the Fourier representation of some axis.
    pub fn uses_fourier(&self) -> bool {
        matches!(
            self,
            SplitStep::Translate { .. } | SplitStep::FourierQuadratic { .. } | SplitStep::GaussianFourier { .. } | SplitStep::Shear { .. }
        )
    }
}

/// `I + α e_j e_kᵀ`: the linear map a shear step composes the field with.
pub fn shear_matrix<T: Real>(n: usize, target: usize, source: usize, alpha: T) -> RMat<T> {
    let mut g = RMat::identity(n, n);
    g[(target, source)] += alpha;
    g
}

/// 64-bit FNV-1a digest of a coefficient snapshot, as 16 hex digits.
pub fn digest(values: impl IntoIterator<Item = f64>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// One record per iteration of an iterative solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub residual: f64,
    /// Hex digest of the coefficient snapshot.
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Catalog { name: String },
    Iteration { solver: String, log: Vec<IterationRecord> },
    Custom { note: String },
}

/// Steps in execution order together with the semigroup they reproduce:
/// applying the steps one after the other equals `e^{−t·target^w}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingProgram<T: Real> {
    pub dim: usize,
    pub steps: Vec<SplitStep<T>>,
    /// `None` when only a matrix-level statement is available (shear
    /// factorization of a matrix without a real logarithm).
    pub target: Option<QuadraticSymbol<T>>,
    pub t: T,
    pub provenance: Provenance,
}

impl<T: Real> SplittingProgram<T> {
    pub fn new(
        dim: usize,
        steps: Vec<SplitStep<T>>,
        target: Option<QuadraticSymbol<T>>,
        t: T,
        provenance: Provenance,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(SplitError::ZeroDimension);
        }
        for s in &steps {
            s.validate(dim)?;
        }
        if let Some(tg) = &target {
            if tg.dim() != dim {
                return Err(SplitError::DimensionMismatch { expected: dim, found: tg.dim() });
            }
        }
        Ok(Self { dim, steps, target, t, provenance })
    }

    pub fn catalog(dim: usize, steps: Vec<SplitStep<T>>, target: QuadraticSymbol<T>, t: T, name: &str) -> Result<Self> {
        Self::new(dim, steps, Some(target), t, Provenance::Catalog { name: name.to_string() })
    }

    /// Factor symbols in execution order.
    pub fn factor_symbols(&self) -> Vec<QuadraticSymbol<T>> {
        self.steps.iter().map(|s| s.symbol(self.dim)).collect()
    }

    /// Affine flows of the factors in execution order.
    pub fn factor_flows(&self) -> Result<Vec<AffineFlow<T>>> {
        self.factor_symbols().iter().map(|s| affine_flow(s, T::one())).collect()
    }

    /// Flow of the whole program. The operator is `S_m⋯S_1`, whose flow is the
    /// product of the factor flows in the same order.
    pub fn flow(&self) -> Result<AffineFlow<T>> {
        let mut flows = self.factor_flows()?;
        if flows.is_empty() {
            return Ok(AffineFlow::identity(self.dim));
        }
        flows.reverse();
        compose_affine(&flows)
    }

    pub fn target_flow(&self) -> Result<Option<AffineFlow<T>>> {
        match &self.target {
            Some(tg) => affine_flow(tg, self.t).map(Some),
            None => Ok(None),
        }
    }

    /// Linear map `G = G₁⋯G_m` with `program(u) = u∘G`, when every step is a shear.
    pub fn transport_matrix(&self) -> Option<RMat<T>> {
        let mut g = RMat::identity(self.dim, self.dim);
        for s in &self.steps {
            match s {
                SplitStep::Shear { target, source, alpha } => g *= shear_matrix(self.dim, *target, *source, *alpha),
                _ => return None,
            }
        }
        Some(g)
    }

    pub fn count(&self, kind: &str) -> usize {
        self.steps.iter().filter(|s| s.kind() == kind).count()
    }

    /// The same program applied `k` times in a row (target time `k·t`).
    pub fn repeat(&self, k: usize) -> Self {
        let mut steps = Vec::with_capacity(self.steps.len() * k);
        for _ in 0..k {
            steps.extend(self.steps.iter().cloned());
        }
        Self {
            dim: self.dim,
            steps,
            target: self.target.clone(),
            t: self.t * lit::<T>(k as f64),
            provenance: self.provenance.clone(),
        }
    }

    pub fn to_record(&self) -> ProgramRecord {
        ProgramRecord {
            dim: self.dim,
            t: to_f64(self.t),
            target: self.target.as_ref().map(|s| s.to_record()),
            provenance: self.provenance.clone(),
            steps: self.steps.iter().map(StepRecord::from_step).collect(),
        }
    }

    pub fn from_record(r: &ProgramRecord) -> Result<Self> {
        let steps = r.steps.iter().map(|s| s.to_step(r.dim)).collect::<Result<Vec<_>>>()?;
        let target = r.target.as_ref().map(QuadraticSymbol::from_record).transpose()?;
        Self::new(r.dim, steps, target, lit(r.t), r.provenance.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(text)?)
    }
}

/// Serialized program: steps in execution order, full-precision coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramRecord {
    pub dim: usize,
    pub t: f64,
    pub target: Option<SymbolRecord>,
    pub provenance: Provenance,
    pub steps: Vec<StepRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRecord {
    Translate { axis: usize, alpha: f64 },
    Modulate { axis: usize, alpha: f64 },
    FourierQuadratic { a: Vec<Vec<f64>> },
    XQuadratic { a: Vec<Vec<f64>> },
    Shear { target: usize, source: usize, alpha: f64 },
    GaussianX { b: Vec<Vec<f64>> },
    GaussianFourier { b: Vec<Vec<f64>> },
    Scalar { re: f64, im: f64 },
}

fn mat_rows<T: Real>(a: &RMat<T>) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().map(|v| to_f64(*v)).collect()).collect()
}

fn rows_mat<T: Real>(rows: &[Vec<f64>], n: usize) -> Result<RMat<T>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(SplitError::Format(format!("step matrix must be {n}x{n}")));
    }
    Ok(RMat::from_fn(n, n, |i, j| lit(rows[i][j])))
}

impl StepRecord {
    pub fn from_step<T: Real>(s: &SplitStep<T>) -> Self {
        match s {
            SplitStep::Translate { axis, alpha } => StepRecord::Translate { axis: *axis, alpha: to_f64(*alpha) },
            SplitStep::Modulate { axis, alpha } => StepRecord::Modulate { axis: *axis, alpha: to_f64(*alpha) },
            SplitStep::FourierQuadratic { a } => StepRecord::FourierQuadratic { a: mat_rows(a) },
            SplitStep::XQuadratic { a } => StepRecord::XQuadratic { a: mat_rows(a) },
            SplitStep::Shear { target, source, alpha } => StepRecord::Shear { target: *target, source: *source, alpha: to_f64(*alpha) },
            SplitStep::GaussianX { b } => StepRecord::GaussianX { b: mat_rows(b) },
            SplitStep::GaussianFourier { b } => StepRecord::GaussianFourier { b: mat_rows(b) },
            SplitStep::Scalar { gamma } => StepRecord::Scalar { re: to_f64(gamma.re), im: to_f64(gamma.im) },
        }
    }

    pub fn to_step<T: Real>(&self, n: usize) -> Result<SplitStep<T>> {
        Ok(match self {
            StepRecord::Translate { axis, alpha } => SplitStep::Translate { axis: *axis, alpha: lit(*alpha) },
            StepRecord::Modulate { axis, alpha } => SplitStep::Modulate { axis: *axis, alpha: lit(*alpha) },
            StepRecord::FourierQuadratic { a } => SplitStep::FourierQuadratic { a: rows_mat(a, n)? },
            StepRecord::XQuadratic { a } => SplitStep::XQuadratic { a: rows_mat(a, n)? },
            StepRecord::Shear { target, source, alpha } => SplitStep::Shear { target: *target, source: *source, alpha: lit(*alpha) },
            StepRecord::GaussianX { b } => SplitStep::GaussianX { b: rows_mat(b, n)? },
            StepRecord::GaussianFourier { b } => SplitStep::GaussianFourier { b: rows_mat(b, n)? },
            StepRecord::Scalar { re, im } => SplitStep::Scalar { gamma: C::new(lit(*re), lit(*im)) },
        })
    }
}
