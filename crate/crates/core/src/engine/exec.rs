use nalgebra::ComplexField;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustfft::{Fft, FftNum, FftPlanner};
use serde::{Deserialize, Serialize};

use super::field::{Space, StateField};
use super::grid::Grid;
use crate::error::{Result, SplitError};
use crate::linalg::min_symmetric_eigenvalue;
use crate::program::{SplitStep, SplittingProgram};
use crate::scalar::{lit, to_f64, Real, RMat, C};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionStats {
    /// Number of 1-D transforms of the whole grid along one axis.
    pub passes: usize,
    /// Number of length-N transforms along a single line.
    pub fft_1d_calls: usize,
    /// Number of complex values multiplied by a step multiplier.
    pub pointwise_mults: usize,
    pub wall_time: Duration,
}

impl ExecutionStats {
    pub fn merge(&mut self, other: &ExecutionStats) {
        self.passes += other.passes;
        self.fft_1d_calls += other.fft_1d_calls;
        self.pointwise_mults += other.pointwise_mults;
        self.wall_time += other.wall_time;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostic {
    pub step_index: usize,
    pub kind: String,
    pub norm_after: f64,
    pub fft_calls: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecOptions {
    /// Keep axes in frequency space between steps and transform only when a step needs the other side.
    pub fuse: bool,
    /// Record the norm after every step.
    pub diagnostics: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { fuse: true, diagnostics: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub stats: ExecutionStats,
    pub diagnostics: Vec<StepDiagnostic>,
    /// Relative squared mass in the outer 5% shell after execution.
    pub boundary_mass: f64,
}

struct LinePtr<T>(*mut C<T>);
// SAFETY: every worker touches a disjoint set of indices (one grid line each).
unsafe impl<T> Send for LinePtr<T> {}
unsafe impl<T> Sync for LinePtr<T> {}

/// FFT executor for one grid, with plans prepared for every axis.
pub struct SpectralEngine<T: Real + FftNum> {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
}

enum Requirement {
    Any,
    Axes(Vec<(usize, Space)>),
}

fn support<T: Real>(m: &RMat<T>) -> Vec<usize> {
    (0..m.nrows()).filter(|&d| (0..m.ncols()).any(|k| m[(d, k)] != T::zero() || m[(k, d)] != T::zero())).collect()
}

fn check_psd<T: Real>(b: &RMat<T>, kind: &str) -> Result<()> {
    let min = to_f64(min_symmetric_eigenvalue(b));
    let scale = to_f64(b.norm()).max(1.0);
    if min < -1e-12 * scale {
        return Err(SplitError::InvalidParameter(format!(
            "{kind} matrix has eigenvalue {min:e} < 0; the multiplier would grow without bound"
        )));
    }
    Ok(())
}

impl<T: Real + FftNum> SpectralEngine<T> {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid.sizes().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = grid.sizes().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        SpectralEngine { grid: grid.clone(), forward, inverse }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn check_field(&self, field: &StateField<T>) -> Result<()> {
        if field.grid() != &self.grid {
            return Err(SplitError::Grid("field grid differs from the engine grid".into()));
        }
        Ok(())
    }

    /// Transforms every line along axis `d`; the inverse includes the `1/N` factor.
    fn transform(&self, field: &mut StateField<T>, d: usize, to: Space, stats: &mut ExecutionStats) {
        let n = self.grid.sizes()[d];
        let stride = self.grid.stride(d);
        let lines = self.grid.len() / n;
        let fft = match to {
            Space::Frequency => self.forward[d].clone(),
            Space::Physical => self.inverse[d].clone(),
        };
        let scale = match to {
            Space::Frequency => None,
            Space::Physical => Some(T::one() / lit::<T>(n as f64)),
        };
        let scratch_len = fft.get_inplace_scratch_len();
        let values = field.values_mut();
        if stride == 1 {
            values.par_chunks_mut(n).for_each_init(
                || vec![C::new(T::zero(), T::zero()); scratch_len],
                |scratch, line| {
                    fft.process_with_scratch(line, scratch);
                    if let Some(s) = scale {
                        line.iter_mut().for_each(|z| *z = z.scale(s));
                    }
                },
            );
        } else {
            let block = n * stride;
            let ptr = LinePtr(values.as_mut_ptr());
            let ptr = &ptr;
            (0..lines).into_par_iter().for_each_init(
                || (vec![C::new(T::zero(), T::zero()); n], vec![C::new(T::zero(), T::zero()); scratch_len]),
                |(buf, scratch), line| {
                    let base = (line / stride) * block + line % stride;
                    // SAFETY: the indices base + m·stride, m < n, belong to this line only.
                    unsafe {
                        for (m, b) in buf.iter_mut().enumerate() {
                            *b = *ptr.0.add(base + m * stride);
                        }
                    }
                    fft.process_with_scratch(buf, scratch);
                    unsafe {
                        for (m, b) in buf.iter().enumerate() {
                            *ptr.0.add(base + m * stride) = match scale {
                                Some(s) => b.scale(s),
                                None => *b,
                            };
                        }
                    }
                },
            );
        }
        field.set_space(d, to);
        stats.passes += 1;
        stats.fft_1d_calls += lines;
    }

    fn ensure(&self, field: &mut StateField<T>, req: &Requirement, stats: &mut ExecutionStats) -> Vec<usize> {
        let mut changed = Vec::new();
        if let Requirement::Axes(axes) = req {
            for &(d, s) in axes {
                if field.space()[d] != s {
                    self.transform(field, d, s, stats);
                    changed.push(d);
                }
            }
        }
        changed
    }

    /// Brings every axis back to physical space.
    pub fn to_physical(&self, field: &mut StateField<T>, stats: &mut ExecutionStats) -> Result<()> {
        self.check_field(field)?;
        for d in 0..self.grid.dim() {
            if field.space()[d] == Space::Frequency {
                self.transform(field, d, Space::Physical, stats);
            }
        }
        Ok(())
    }

    fn requirement(&self, step: &SplitStep<T>) -> Result<Requirement> {
        let n = self.grid.dim();
        step.validate(n)?;
        let phys = |axes: Vec<usize>| Requirement::Axes(axes.into_iter().map(|d| (d, Space::Physical)).collect());
        let freq = |axes: Vec<usize>| Requirement::Axes(axes.into_iter().map(|d| (d, Space::Frequency)).collect());
        Ok(match step {
            SplitStep::Scalar { .. } => Requirement::Any,
            SplitStep::Modulate { axis, .. } => phys(vec![*axis]),
            SplitStep::XQuadratic { a } => phys(support(a)),
            SplitStep::GaussianX { b } => {
                check_psd(b, "gaussian_x")?;
                phys(support(b))
            }
            SplitStep::Translate { axis, .. } => freq(vec![*axis]),
            SplitStep::FourierQuadratic { a } => freq(support(a)),
            SplitStep::GaussianFourier { b } => {
                check_psd(b, "gaussian_fourier")?;
                freq(support(b))
            }
            SplitStep::Shear { target, source, alpha } => {
                let displacement = to_f64(*alpha).abs() * self.grid.max_abs_point(*source);
                let half = 0.5 * self.grid.period(*target);
                if displacement > half {
                    return Err(SplitError::Aliasing { dim: *target, displacement, half_period: half });
                }
                Requirement::Axes(vec![(*target, Space::Frequency), (*source, Space::Physical)])
            }
        })
    }

    /// Multiplies by `exp(phase(idx))` where `phase` sees per-axis indices.
    fn multiply<F>(&self, field: &mut StateField<T>, stats: &mut ExecutionStats, exponent: F)
    where
        F: Fn(&[usize]) -> C<T> + Sync,
    {
        let n = self.grid.dim();
        let last = self.grid.sizes()[n - 1];
        let grid = &self.grid;
        field.values_mut().par_chunks_mut(last).enumerate().for_each_init(
            || vec![0usize; n],
            |idx, (row, chunk)| {
                grid.unravel(row * last, idx);
                for (m, z) in chunk.iter_mut().enumerate() {
                    idx[n - 1] = m;
                    *z *= exponent(idx).exp();
                }
            },
        );
        stats.pointwise_mults += self.grid.len();
    }

    fn apply_in_place(&self, field: &mut StateField<T>, step: &SplitStep<T>, req: &Requirement, stats: &mut ExecutionStats) {
        let n = self.grid.dim();
        let x: Vec<Vec<T>> = (0..n).map(|d| self.grid.points(d)).collect();
        let xi: Vec<Vec<T>> = (0..n).map(|d| self.grid.frequencies(d)).collect();
        let odd: Vec<Vec<T>> = (0..n).map(|d| self.grid.odd_frequencies(d)).collect();
        let i = C::new(T::zero(), T::one());
        // quadratic form with full frequencies on the diagonal and odd ones off it
        let form = |m: &RMat<T>, axes: &[usize], idx: &[usize], diag: &[Vec<T>], off: &[Vec<T>]| -> T {
            let mut acc = T::zero();
            for (p, &j) in axes.iter().enumerate() {
                acc += m[(j, j)] * diag[j][idx[j]] * diag[j][idx[j]];
                for &k in &axes[p + 1..] {
                    acc += (m[(j, k)] + m[(k, j)]) * off[j][idx[j]] * off[k][idx[k]];
                }
            }
            acc
        };
        let axes: Vec<usize> = match req {
            Requirement::Axes(a) => a.iter().map(|p| p.0).collect(),
            Requirement::Any => Vec::new(),
        };
        match step {
            SplitStep::Scalar { gamma } => {
                if *gamma != C::new(T::zero(), T::zero()) {
                    let f = gamma.exp();
                    field.values_mut().par_iter_mut().for_each(|z| *z *= f);
                    stats.pointwise_mults += self.grid.len();
                }
            }
            SplitStep::Modulate { axis, alpha } => {
                let (j, a) = (*axis, *alpha);
                self.multiply(field, stats, |idx| i * a * x[j][idx[j]]);
            }
            SplitStep::Translate { axis, alpha } => {
                let (j, a) = (*axis, *alpha);
                self.multiply(field, stats, |idx| i * a * odd[j][idx[j]]);
            }
            SplitStep::XQuadratic { a } => {
                if !axes.is_empty() {
                    self.multiply(field, stats, |idx| i * form(a, &axes, idx, &x, &x));
                }
            }
            SplitStep::GaussianX { b } => {
                if !axes.is_empty() {
                    self.multiply(field, stats, |idx| C::new(-form(b, &axes, idx, &x, &x), T::zero()));
                }
            }
            SplitStep::FourierQuadratic { a } => {
                if !axes.is_empty() {
                    self.multiply(field, stats, |idx| -i * form(a, &axes, idx, &xi, &odd));
                }
            }
            SplitStep::GaussianFourier { b } => {
                if !axes.is_empty() {
                    self.multiply(field, stats, |idx| C::new(-form(b, &axes, idx, &xi, &odd), T::zero()));
                }
            }
            SplitStep::Shear { target, source, alpha } => {
                let (j, k, a) = (*target, *source, *alpha);
                if a != T::zero() {
                    self.multiply(field, stats, |idx| i * a * x[k][idx[k]] * odd[j][idx[j]]);
                }
            }
        }
    }

    fn step_inner(&self, field: &mut StateField<T>, step: &SplitStep<T>, fuse: bool, stats: &mut ExecutionStats) -> Result<()> {
        let req = self.requirement(step)?;
        if is_noop(step) {
            return Ok(());
        }
        let changed = self.ensure(field, &req, stats);
        self.apply_in_place(field, step, &req, stats);
        if !fuse {
            for d in changed.into_iter().rev() {
                if field.space()[d] == Space::Frequency {
                    self.transform(field, d, Space::Physical, stats);
                }
            }
        }
        Ok(())
    }

    /// Applies one step and returns the field to the representation it was given in.
    pub fn apply_step(&self, field: &mut StateField<T>, step: &SplitStep<T>) -> Result<ExecutionStats> {
        self.check_field(field)?;
        let start = Instant::now();
        let mut stats = ExecutionStats::default();
        self.step_inner(field, step, false, &mut stats)?;
        stats.wall_time = start.elapsed();
        Ok(stats)
    }

    /// Applies the steps of `prog` in order and leaves the field in physical space.
    pub fn execute(&self, field: &mut StateField<T>, prog: &SplittingProgram<T>, opts: ExecOptions) -> Result<ExecutionReport> {
        self.check_field(field)?;
        if prog.dim != self.grid.dim() {
            return Err(SplitError::DimensionMismatch { expected: self.grid.dim(), found: prog.dim });
        }
        let start = Instant::now();
        let mut stats = ExecutionStats::default();
        let mut diagnostics = Vec::new();
        for (k, step) in prog.steps.iter().enumerate() {
            let before = stats.fft_1d_calls;
            self.step_inner(field, step, opts.fuse, &mut stats)?;
            if opts.diagnostics {
                diagnostics.push(StepDiagnostic {
                    step_index: k,
                    kind: step.kind().to_string(),
                    norm_after: field.l2_norm(),
                    fft_calls: stats.fft_1d_calls - before,
                });
            }
        }
        let before = stats.fft_1d_calls;
        self.to_physical(field, &mut stats)?;
        if opts.diagnostics {
            if let Some(last) = diagnostics.last_mut() {
                last.fft_calls += stats.fft_1d_calls - before;
                last.norm_after = field.l2_norm();
            }
        }
        stats.wall_time = start.elapsed();
        if !field.all_finite() {
            return Err(SplitError::NonFinite("field after execution"));
        }
        let boundary_mass = field.boundary_mass()?;
        Ok(ExecutionReport { stats, diagnostics, boundary_mass })
    }
}

fn is_noop<T: Real>(step: &SplitStep<T>) -> bool {
    let zero = |m: &RMat<T>| m.iter().all(|v| *v == T::zero());
    match step {
        SplitStep::Translate { alpha, .. } | SplitStep::Modulate { alpha, .. } | SplitStep::Shear { alpha, .. } => *alpha == T::zero(),
        SplitStep::FourierQuadratic { a } | SplitStep::XQuadratic { a } => zero(a),
        SplitStep::GaussianX { b } | SplitStep::GaussianFourier { b } => zero(b),
        SplitStep::Scalar { gamma } => gamma.re == T::zero() && gamma.im == T::zero(),
    }
}

/// Runs `prog` on `field` with a freshly planned engine.
pub fn execute<T: Real + FftNum>(field: &mut StateField<T>, prog: &SplittingProgram<T>, fuse: bool) -> Result<ExecutionStats> {
    let engine = SpectralEngine::new(field.grid());
    Ok(engine.execute(field, prog, ExecOptions { fuse, diagnostics: false })?.stats)
}

/// Applies a single step with a freshly planned engine.
pub fn apply_step<T: Real + FftNum>(field: &mut StateField<T>, step: &SplitStep<T>) -> Result<ExecutionStats> {
    SpectralEngine::new(field.grid()).apply_step(field, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::harmonic_oscillator;
    use crate::splitter::schrodinger::schrodinger_coefficients;
    use crate::splitter::FixedPointOptions;

    fn gauss(g: &Grid) -> StateField<f64> {
        StateField::gaussian(g.clone(), &vec![0.0; g.dim()], 1.0).unwrap()
    }

    #[test]
    fn zero_scalar_and_empty_program_are_identity() {
        let g = Grid::cube(2, 16, 6.0).unwrap();
        let mut f = gauss(&g);
        let f0 = f.clone();
        let s = apply_step(&mut f, &SplitStep::Scalar { gamma: C::new(0.0, 0.0) }).unwrap();
        assert_eq!(f, f0);
        assert_eq!(s.fft_1d_calls, 0);
        let prog = SplittingProgram::new(2, vec![], None, 0.0, crate::program::Provenance::Custom { note: "empty".into() }).unwrap();
        let s = execute(&mut f, &prog, true).unwrap();
        assert_eq!(f, f0);
        assert_eq!(s.fft_1d_calls, 0);
    }

    #[test]
    fn translate_by_one_spacing_is_a_roll() {
        let g = Grid::new(vec![32], vec![(0.0, 2.0 * std::f64::consts::PI)]).unwrap();
        let h = g.spacing(0);
        // band-limited: no Nyquist content
        let f = StateField::from_fn(g.clone(), |x: &[f64]| C::new((3.0 * x[0]).cos() + 0.5 * (7.0 * x[0]).sin(), (2.0 * x[0]).sin()));
        let mut shifted = f.clone();
        apply_step(&mut shifted, &SplitStep::Translate { axis: 0, alpha: h }).unwrap();
        let v = f.values();
        for (m, z) in shifted.values().iter().enumerate() {
            assert!((*z - v[(m + 1) % 32]).norm() < 1e-12);
        }
    }

    #[test]
    fn shear_follows_characteristics() {
        let g = Grid::cube(2, 64, 10.0).unwrap();
        let u = |x: f64, y: f64| (-(x * x) / 2.0 - y * y / 2.0).exp();
        let mut f = StateField::from_fn(g.clone(), |p: &[f64]| C::new(u(p[0], p[1]), 0.0));
        let alpha = 0.4;
        apply_step(&mut f, &SplitStep::Shear { target: 0, source: 1, alpha }).unwrap();
        let exact = StateField::from_fn(g.clone(), |p: &[f64]| C::new(u(p[0] + alpha * p[1], p[1]), 0.0));
        assert!(f.max_abs_diff(&exact).unwrap() < 1e-10);
        let mut f = gauss(&g);
        assert!(matches!(
            apply_step(&mut f, &SplitStep::Shear { target: 0, source: 1, alpha: 1.5 }),
            Err(SplitError::Aliasing { .. })
        ));
    }

    #[test]
    fn unitary_steps_preserve_norm_and_gaussians_contract() {
        let g = Grid::cube(2, 32, 8.0).unwrap();
        let mut f = StateField::from_fn(g.clone(), |p: &[f64]| C::new((-(p[0] - 1.0).powi(2) - p[1] * p[1]).exp(), p[0] * (-p[0] * p[0]).exp()));
        let a = RMat::from_row_slice(2, 2, &[0.3, -0.2, -0.2, 0.7]);
        let steps = [
            SplitStep::Modulate { axis: 1, alpha: 0.7 },
            SplitStep::XQuadratic { a: a.clone() },
            SplitStep::FourierQuadratic { a: a.clone() },
            SplitStep::Shear { target: 1, source: 0, alpha: -0.3 },
            SplitStep::Translate { axis: 0, alpha: 0.25 },
        ];
        for s in &steps {
            let before = f.l2_norm();
            apply_step(&mut f, s).unwrap();
            assert!((f.l2_norm() / before - 1.0).abs() < 1e-13, "{}", s.kind());
        }
        for s in [SplitStep::GaussianX { b: a.clone() }, SplitStep::GaussianFourier { b: a.clone() }] {
            let before = f.l2_norm();
            apply_step(&mut f, &s).unwrap();
            assert!(f.l2_norm() <= before * (1.0 + 1e-13));
        }
        let neg = RMat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(apply_step(&mut f, &SplitStep::GaussianX { b: neg }).is_err());
    }

    #[test]
    fn harmonic_step_is_exact_and_uses_two_passes() {
        let g = Grid::cube(1, 128, 10.0).unwrap();
        let mut f = gauss(&g);
        let f0 = f.clone();
        let stats = execute(&mut f, &harmonic_oscillator(0.5, 1).unwrap(), true).unwrap();
        assert_eq!(stats.passes, 2);
        assert_eq!(stats.fft_1d_calls, 2);
        let mut expect = f0;
        expect.scale(C::new((-0.5f64).exp(), 0.0));
        assert!(f.l2_error(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn fused_and_unfused_agree() {
        let g = Grid::cube(2, 32, 8.0).unwrap();
        let b = RMat::from_row_slice(2, 2, &[0.2, 0.05, 0.05, 0.1]);
        let steps = vec![
            SplitStep::GaussianFourier { b: b.clone() },
            SplitStep::Translate { axis: 1, alpha: 0.3 },
            SplitStep::GaussianFourier { b },
        ];
        let prog = SplittingProgram::new(2, steps, None, 0.0, crate::program::Provenance::Custom { note: "mixed".into() }).unwrap();
        let (mut a, mut b) = (gauss(&g), gauss(&g));
        let sa = execute(&mut a, &prog, true).unwrap();
        let sb = execute(&mut b, &prog, false).unwrap();
        assert!(a.l2_error(&b).unwrap() < 1e-14);
        assert_eq!((sa.passes, sb.passes), (4, 10));
    }

    #[test]
    fn schrodinger_program_uses_2n_passes() {
        for n in [2usize, 3] {
            let v = RMat::<f64>::identity(n, n);
            let mut bm = RMat::zeros(n, n);
            bm[(0, 1)] = 1.0;
            bm[(1, 0)] = -1.0;
            let co = schrodinger_coefficients(&v, &bm, 0.1, &FixedPointOptions::default()).unwrap();
            let g = Grid::cube(n, 16, 8.0).unwrap();
            let mut f = gauss(&g);
            let before = f.l2_norm();
            let stats = execute(&mut f, &co.program().unwrap(), true).unwrap();
            assert_eq!(stats.passes, 2 * n, "n = {n}");
            assert_eq!(stats.fft_1d_calls, 2 * n * 16usize.pow(n as u32 - 1));
            assert!((f.l2_norm() / before - 1.0).abs() < 1e-12);
        }
    }
}
