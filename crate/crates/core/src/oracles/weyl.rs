use crate::engine::{Grid, StateField};
use crate::error::{Result, SplitError};
use crate::scalar::{czero, lit, to_f64, CMat, CVec, Real, C};
use crate::symplectic::QuadraticSymbol;

/// Largest number of grid points a dense oracle accepts.
pub const MAX_DENSE_POINTS: usize = 4096;

/// Dense collocation matrix of a Weyl-quantized symbol on a periodic grid.
#[derive(Clone, Debug)]
pub struct DenseOperator<T: Real> {
    pub grid: Grid,
    pub matrix: CMat<T>,
}

/// `F⁻¹ diag(w) F` for the unnormalized DFT of length `w.len()`.
fn fourier_multiplier<T: Real>(w: &[T]) -> CMat<T> {
    let n = w.len();
    let two_pi = lit::<T>(2.0) * T::pi();
    let nn = lit::<T>(n as f64);
    // circulant: entry (m, j) depends on m − j only
    let col: Vec<C<T>> = (0..n)
        .map(|d| {
            let mut acc = czero::<T>();
            for (k, &wk) in w.iter().enumerate() {
                let ang = two_pi * lit::<T>(((k * d) % n) as f64) / nn;
                acc += C::new(ang.cos(), ang.sin()) * wk;
            }
            acc / nn
        })
        .collect();
    CMat::from_fn(n, n, |m, j| col[(m + n - j) % n])
}

/// Embeds per-axis factors into the full row-major tensor space.
fn kron_axes<T: Real>(grid: &Grid, factors: &[(usize, &CMat<T>)]) -> CMat<T> {
    let mut out = CMat::<T>::identity(1, 1);
    for d in 0..grid.dim() {
        let n = grid.sizes()[d];
        let mut f = CMat::<T>::identity(n, n);
        for (axis, m) in factors {
            if *axis == d {
                f = &f * *m;
            }
        }
        out = out.kronecker(&f);
    }
    out
}

struct AxisOps<T: Real> {
    x: CMat<T>,
    d: CMat<T>,
    d2: CMat<T>,
    x2: CMat<T>,
}

fn axis_ops<T: Real>(grid: &Grid, d: usize) -> AxisOps<T> {
    let pts: Vec<T> = grid.points(d);
    let x = CMat::from_diagonal(&CVec::from_iterator(pts.len(), pts.iter().map(|&v| C::new(v, T::zero()))));
    let x2 = CMat::from_diagonal(&CVec::from_iterator(pts.len(), pts.iter().map(|&v| C::new(v * v, T::zero()))));
    let odd: Vec<T> = grid.odd_frequencies(d);
    let full: Vec<T> = grid.frequencies(d);
    let sq: Vec<T> = full.iter().map(|&v| v * v).collect();
    AxisOps { x, d: fourier_multiplier(&odd), d2: fourier_multiplier(&sq), x2 }
}

/// Builds `p^w` with `x_j` as multiplication, `ξ_j` as the spectral derivative `−i∂_j`,
/// and cross terms in the symmetric order `½(AB + BA)`.
pub fn discretize_weyl<T: Real>(p: &QuadraticSymbol<T>, grid: &Grid) -> Result<DenseOperator<T>> {
    let n = p.dim();
    if grid.dim() != n {
        return Err(SplitError::DimensionMismatch { expected: n, found: grid.dim() });
    }
    if grid.len() > MAX_DENSE_POINTS {
        return Err(SplitError::SizeCap { size: grid.len(), cap: MAX_DENSE_POINTS });
    }
    let ops: Vec<AxisOps<T>> = (0..n).map(|d| axis_ops(grid, d)).collect();
    // (axis, operator) for coordinate a of X = (x, ξ)
    let coord = |a: usize| -> (usize, &CMat<T>) {
        if a < n {
            (a, &ops[a].x)
        } else {
            (a - n, &ops[a - n].d)
        }
    };
    let size = grid.len();
    let q = p.q();
    let half = lit::<T>(0.5);
    let mut m = CMat::<T>::identity(size, size) * p.c();
    for a in 0..2 * n {
        let ya = p.y()[a];
        if ya != czero() {
            let (ax, op) = coord(a);
            m += kron_axes(grid, &[(ax, op)]) * ya;
        }
        let qaa = q[(a, a)];
        if qaa != czero() {
            let sq = if a < n { (a, &ops[a].x2) } else { (a - n, &ops[a - n].d2) };
            m += kron_axes(grid, &[sq]) * qaa;
        }
        for b in (a + 1)..2 * n {
            let w = q[(a, b)] + q[(b, a)];
            if w == czero() {
                continue;
            }
            let (ia, oa) = coord(a);
            let (ib, ob) = coord(b);
            let ab = kron_axes(grid, &[(ia, oa), (ib, ob)]);
            let ba = kron_axes(grid, &[(ib, ob), (ia, oa)]);
            m += (ab + ba) * (w * half);
        }
    }
    Ok(DenseOperator { grid: grid.clone(), matrix: m })
}

impl<T: Real> DenseOperator<T> {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &CVec<T>) -> CVec<T> {
        matvec(&self.matrix, v)
    }

    /// Hermitian defect `‖M − M*‖_F / ‖M‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        to_f64(d.norm()) / to_f64(self.matrix.norm()).max(f64::MIN_POSITIVE)
    }
}

pub fn matvec<T: Real>(m: &CMat<T>, v: &CVec<T>) -> CVec<T> {
    m * v
}

pub fn field_to_vector<T: Real>(f: &StateField<T>) -> CVec<T> {
    CVec::from_column_slice(f.values())
}

pub fn vector_to_field<T: Real>(grid: &Grid, v: &CVec<T>) -> Result<StateField<T>> {
    StateField::new(grid.clone(), v.iter().copied().collect())
}

/// Hermite-type test functions `x^α e^{−|x−c|²/2}` that the grid resolves in both `x` and `ξ`.
pub fn resolved_test_vectors<T: Real>(grid: &Grid, max_degree: usize) -> Vec<CVec<T>> {
    let n = grid.dim();
    let mut out = Vec::new();
    let mut alpha = vec![0usize; n];
    loop {
        if alpha.iter().sum::<usize>() <= max_degree {
            let a = alpha.clone();
            let f = StateField::<T>::from_fn(grid.clone(), |x| {
                let mut v = T::one();
                let mut r2 = T::zero();
                for d in 0..n {
                    v *= x[d].powi(a[d] as i32);
                    r2 += x[d] * x[d];
                }
                C::new(v * (-r2 * lit::<T>(0.5)).exp(), T::zero())
            });
            let mut vec = field_to_vector(&f);
            let nrm = vec.norm();
            vec /= C::new(nrm, T::zero());
            out.push(vec);
        }
        let mut d = 0;
        loop {
            if d == n {
                return out;
            }
            alpha[d] += 1;
            if alpha[d] <= max_degree {
                break;
            }
            alpha[d] = 0;
            d += 1;
        }
    }
}

/// Largest relative defect of `[q₁^w, q₂^w] + i{q₁, q₂}^w` on resolved test vectors.
pub fn commutator_defect<T: Real>(q1: &QuadraticSymbol<T>, q2: &QuadraticSymbol<T>, grid: &Grid, max_degree: usize) -> Result<f64> {
    let a = discretize_weyl(q1, grid)?;
    let b = discretize_weyl(q2, grid)?;
    let br = discretize_weyl(&q1.poisson_bracket(q2)?, grid)?;
    let i = C::new(T::zero(), T::one());
    let mut worst = 0.0f64;
    for v in resolved_test_vectors::<T>(grid, max_degree) {
        let av = a.apply(&v);
        let bv = b.apply(&v);
        let comm = a.apply(&bv) - b.apply(&av);
        let rhs = br.apply(&v) * i;
        let scale = to_f64(a.apply(&av).norm() + b.apply(&bv).norm() + av.norm() * bv.norm()).max(1.0);
        worst = worst.max(to_f64((comm + rhs).norm()) / scale);
    }
    Ok(worst)
}
