use nalgebra::ComplexField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Result, SplitError};
use crate::scalar::{czero, lit, to_f64, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Physical,
    Frequency,
}

/// Complex samples on a [`Grid`], row-major, with a representation flag per dimension.
///
/// A dimension flagged [`Space::Frequency`] holds the unnormalized DFT along that axis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField<T: Real> {
    grid: Grid,
    values: Vec<C<T>>,
    space: Vec<Space>,
}

impl<T: Real> StateField<T> {
    pub fn new(grid: Grid, values: Vec<C<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SplitError::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        let space = vec![Space::Physical; grid.dim()];
        Ok(StateField { grid, values, space })
    }

    pub fn with_space(grid: Grid, values: Vec<C<T>>, space: Vec<Space>) -> Result<Self> {
        if space.len() != grid.dim() {
            return Err(SplitError::DimensionMismatch { expected: grid.dim(), found: space.len() });
        }
        let mut f = StateField::new(grid, values)?;
        f.space = space;
        Ok(f)
    }

    pub fn zeros(grid: Grid) -> Self {
        let len = grid.len();
        let space = vec![Space::Physical; grid.dim()];
        StateField { grid, values: vec![czero(); len], space }
    }

    /// Samples `f` at the grid points.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&[T]) -> C<T> + Sync,
    {
        let n = grid.dim();
        let coords: Vec<Vec<T>> = (0..n).map(|d| grid.points(d)).collect();
        let values = (0..grid.len())
            .into_par_iter()
            .map_init(
                || (vec![0usize; n], vec![T::zero(); n]),
                |(idx, x), flat| {
                    grid.unravel(flat, idx);
                    for d in 0..n {
                        x[d] = coords[d][idx[d]];
                    }
                    f(x)
                },
            )
            .collect();
        let space = vec![Space::Physical; n];
        StateField { grid, values, space }
    }

    /// `exp(−|x − center|² / (2 width²))`.
    pub fn gaussian(grid: Grid, center: &[f64], width: f64) -> Result<Self> {
        if center.len() != grid.dim() {
            return Err(SplitError::DimensionMismatch { expected: grid.dim(), found: center.len() });
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(SplitError::InvalidParameter(format!("gaussian width must be positive, got {width}")));
        }
        let c: Vec<T> = center.iter().map(|&v| lit(v)).collect();
        let k = lit::<T>(0.5 / (width * width));
        Ok(StateField::from_fn(grid, |x| {
            let r2 = x.iter().zip(&c).fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
            C::new((-k * r2).exp(), T::zero())
        }))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C<T>> {
        self.values
    }

    pub fn space(&self) -> &[Space] {
        &self.space
    }

    pub(crate) fn set_space(&mut self, d: usize, s: Space) {
        self.space[d] = s;
    }

    pub fn is_physical(&self) -> bool {
        self.space.iter().all(|s| *s == Space::Physical)
    }

    fn require_physical(&self) -> Result<()> {
        if self.is_physical() {
            Ok(())
        } else {
            Err(SplitError::Grid("operation requires a field in physical space".into()))
        }
    }

    /// Discrete L² norm with cell-volume weights, valid in any mixed representation.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.par_iter().map(|z| to_f64(z.norm_sqr())).sum();
        (sum * self.grid.cell_volume() / self.frequency_weight()).sqrt()
    }

    /// Product of the lengths of the axes held in frequency space (Parseval factor).
    fn frequency_weight(&self) -> f64 {
        self.space
            .iter()
            .zip(self.grid.sizes())
            .filter(|(s, _)| **s == Space::Frequency)
            .map(|(_, &n)| n as f64)
            .product()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.par_iter().map(|z| to_f64(z.modulus())).reduce(|| 0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.par_iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Squared L² mass in the outer 5% shell of every axis, relative to the total.
    pub fn boundary_mass(&self) -> Result<f64> {
        self.require_physical()?;
        let n = self.grid.dim();
        let widths: Vec<usize> = self.grid.sizes().iter().map(|&s| ((s as f64 * 0.05).ceil() as usize).max(1)).collect();
        let grid = &self.grid;
        let (shell, total) = self
            .values
            .par_iter()
            .enumerate()
            .map_init(
                || vec![0usize; n],
                |idx, (flat, z)| {
                    grid.unravel(flat, idx);
                    let m = to_f64(z.norm_sqr());
                    let outer = (0..n).any(|d| idx[d] < widths[d] || idx[d] + widths[d] >= grid.sizes()[d]);
                    (if outer { m } else { 0.0 }, m)
                },
            )
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        Ok(if total > 0.0 { shell / total } else { 0.0 })
    }

    fn check_compatible(&self, other: &StateField<T>) -> Result<()> {
        if self.grid != other.grid {
            return Err(SplitError::Grid("fields live on different grids".into()));
        }
        if self.space != other.space {
            return Err(SplitError::Grid("fields are in different representations".into()));
        }
        Ok(())
    }

    /// `‖a − b‖ / ‖b‖`, or the absolute difference when `‖b‖ < 1e−300`.
    pub fn l2_error(&self, reference: &StateField<T>) -> Result<f64> {
        self.check_compatible(reference)?;
        let diff: f64 = self
            .values
            .par_iter()
            .zip(reference.values.par_iter())
            .map(|(a, b)| to_f64((*a - *b).norm_sqr()))
            .sum();
        let scale = reference.l2_norm();
        let norm = (diff * self.grid.cell_volume() / self.frequency_weight()).sqrt();
        Ok(if scale < 1e-300 { norm } else { norm / scale })
    }

    pub fn max_abs_diff(&self, other: &StateField<T>) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(a, b)| to_f64((*a - *b).modulus()))
            .reduce(|| 0.0, f64::max))
    }

    pub fn scale(&mut self, s: C<T>) {
        self.values.par_iter_mut().for_each(|z| *z *= s);
    }
}

/// Relative L² error between two fields.
pub fn l2_error<T: Real>(a: &StateField<T>, b: &StateField<T>) -> Result<f64> {
    a.l2_error(b)
}

pub fn l2_norm<T: Real>(a: &StateField<T>) -> f64 {
    a.l2_norm()
}
