use serde::{Deserialize, Serialize};

use crate::error::{Result, SplitError};
use crate::scalar::{lit, Real};

/// Uniform periodic tensor grid on `Π [a_d, b_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    sizes: Vec<usize>,
    bounds: Vec<(f64, f64)>,
}

impl Grid {
    pub fn new(sizes: Vec<usize>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(SplitError::ZeroDimension);
        }
        if sizes.len() != bounds.len() {
            return Err(SplitError::DimensionMismatch { expected: sizes.len(), found: bounds.len() });
        }
        for (d, (&n, &(a, b))) in sizes.iter().zip(&bounds).enumerate() {
            if n < 4 {
                return Err(SplitError::Grid(format!("dimension {d} has {n} points; at least 4 are required")));
            }
            if !a.is_finite() || !b.is_finite() || b <= a {
                return Err(SplitError::Grid(format!("dimension {d} has invalid bounds [{a}, {b})")));
            }
        }
        Ok(Grid { sizes, bounds })
    }

    /// Same `size` points on `[-half, half)` in every one of `n` dimensions.
    pub fn cube(n: usize, size: usize, half: f64) -> Result<Self> {
        Grid::new(vec![size; n], vec![(-half, half); n])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn period(&self, d: usize) -> f64 {
        self.bounds[d].1 - self.bounds[d].0
    }

    pub fn spacing(&self, d: usize) -> f64 {
        self.period(d) / self.sizes[d] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|d| self.spacing(d)).product()
    }

    /// Row-major stride of dimension `d`.
    pub fn stride(&self, d: usize) -> usize {
        self.sizes[d + 1..].iter().product()
    }

    pub fn point<T: Real>(&self, d: usize, m: usize) -> T {
        lit::<T>(self.bounds[d].0 + m as f64 * self.spacing(d))
    }

    pub fn points<T: Real>(&self, d: usize) -> Vec<T> {
        (0..self.sizes[d]).map(|m| self.point(d, m)).collect()
    }

    /// Angular frequencies `(2π/L)·k`, `k ∈ {−N/2, …, N/2−1}`, in FFT order.
    pub fn frequencies<T: Real>(&self, d: usize) -> Vec<T> {
        let n = self.sizes[d] as i64;
        let w = 2.0 * std::f64::consts::PI / self.period(d);
        (0..n).map(|k| lit::<T>(w * if k < (n + 1) / 2 { k } else { k - n } as f64)).collect()
    }

    /// Frequencies with the Nyquist mode of an even-length axis set to zero,
    /// for multipliers odd in `ξ`.
    pub fn odd_frequencies<T: Real>(&self, d: usize) -> Vec<T> {
        let mut f = self.frequencies(d);
        let n = self.sizes[d];
        if n % 2 == 0 {
            f[n / 2] = T::zero();
        }
        f
    }

    pub fn max_abs_point(&self, d: usize) -> f64 {
        let (a, _) = self.bounds[d];
        let last = a + (self.sizes[d] - 1) as f64 * self.spacing(d);
        a.abs().max(last.abs())
    }

    /// Splits a flat index into per-dimension indices.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for d in (0..self.dim()).rev() {
            out[d] = flat % self.sizes[d];
            flat /= self.sizes[d];
        }
    }
}
