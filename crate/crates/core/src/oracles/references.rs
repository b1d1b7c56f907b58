use crate::catalog::{dilatation, fokker_planck, harmonic_oscillator, kramers_fokker_planck, rotation2d};
use crate::engine::{Grid, StateField};
use crate::error::{Result, SplitError};
use crate::program::SplittingProgram;
use crate::scalar::{lit, Real, C};

/// A program together with an initial field and the exact result on the same grid.
#[derive(Clone, Debug)]
pub struct ReferenceCase<T: Real> {
    pub name: &'static str,
    pub source: &'static str,
    pub program: SplittingProgram<T>,
    pub initial: StateField<T>,
    pub expected: StateField<T>,
    /// Relative L² tolerance for the executed program.
    pub tolerance: f64,
}

fn real<T: Real>(v: T) -> C<T> {
    C::new(v, T::zero())
}

/// `e^{−|x|²/2}` evolves to `e^{−nt}e^{−|x|²/2}` under `|x|² − Δ`.
pub fn harmonic_ground_state<T: Real>(grid: &Grid, t: T) -> Result<ReferenceCase<T>> {
    let n = grid.dim();
    let initial = StateField::gaussian(grid.clone(), &vec![0.0; n], 1.0)?;
    let mut expected = initial.clone();
    expected.scale(real((-t * lit::<T>(n as f64)).exp()));
    Ok(ReferenceCase {
        name: "harmonic_ground_state",
        source: "ground state of |x|² − Δ with eigenvalue n",
        program: harmonic_oscillator(t, n)?,
        initial,
        expected,
        tolerance: 1e-10,
    })
}

/// Transport of a smooth profile by the characteristics `u ↦ u∘G`, with `G` the
/// product of the program's shear matrices.
pub fn transport<T: Real, F>(grid: &Grid, program: SplittingProgram<T>, u: F, name: &'static str) -> Result<ReferenceCase<T>>
where
    F: Fn(&[T]) -> C<T> + Sync,
{
    let g = program
        .transport_matrix()
        .ok_or_else(|| SplitError::InvalidParameter("program contains steps other than shears".into()))?;
    let n = grid.dim();
    let initial = StateField::from_fn(grid.clone(), &u);
    let expected = StateField::from_fn(grid.clone(), |x| {
        let y: Vec<T> = (0..n).map(|r| (0..n).fold(T::zero(), |acc, k| acc + g[(r, k)] * x[k])).collect();
        u(&y)
    });
    Ok(ReferenceCase { name, source: "method of characteristics", program, initial, expected, tolerance: 1e-10 })
}

/// Rotation of an off-centre Gaussian.
pub fn rotated_gaussian<T: Real>(grid: &Grid, theta: T) -> Result<ReferenceCase<T>> {
    let (cx, cy) = (lit::<T>(1.0), lit::<T>(-0.5));
    transport(
        grid,
        rotation2d(theta)?,
        move |x: &[T]| real((-((x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy)) * lit::<T>(0.5)).exp()),
        "rotated_gaussian",
    )
}

/// `e^{−x²/2}` becomes `e^{−(λx)²/2}`.
pub fn dilated_gaussian<T: Real>(grid: &Grid, lambda: T) -> Result<ReferenceCase<T>> {
    let initial = StateField::gaussian(grid.clone(), &[0.0], 1.0)?;
    let expected = StateField::from_fn(grid.clone(), |x: &[T]| real((-(lambda * x[0]) * (lambda * x[0]) * lit::<T>(0.5)).exp()));
    Ok(ReferenceCase {
        name: "dilated_gaussian",
        source: "u(λx) for the dilatation group",
        program: dilatation(lambda)?,
        initial,
        expected,
        tolerance: 1e-10,
    })
}

fn maxwellian<T: Real>(grid: &Grid) -> Result<StateField<T>> {
    if grid.dim() != 2 {
        return Err(SplitError::DimensionMismatch { expected: 2, found: grid.dim() });
    }
    Ok(StateField::from_fn(grid.clone(), |x: &[T]| real((-x[1] * x[1] * lit::<T>(0.5)).exp())))
}

/// The Maxwellian `e^{−v²/2}`, constant in `x`, is stationary for `v∂_x − ∂_v(v + ∂_v)`.
pub fn fokker_planck_maxwellian<T: Real>(grid: &Grid, t: T) -> Result<ReferenceCase<T>> {
    let initial = maxwellian(grid)?;
    Ok(ReferenceCase {
        name: "fokker_planck_maxwellian",
        source: "∂_v(v + ∂_v)e^{−v²/2} = 0 and no x-dependence",
        program: fokker_planck(t)?,
        expected: initial.clone(),
        initial,
        tolerance: 1e-7,
    })
}

/// `e^{−v²/2}`, constant in `x`, decays as `e^{−t}` under `v∂_x + v² − ∂_v²`.
pub fn kramers_fokker_planck_decay<T: Real>(grid: &Grid, t: T) -> Result<ReferenceCase<T>> {
    let initial = maxwellian(grid)?;
    let mut expected = initial.clone();
    expected.scale(real((-t).exp()));
    Ok(ReferenceCase {
        name: "kramers_fokker_planck_decay",
        source: "(v² − ∂_v²)e^{−v²/2} = e^{−v²/2}",
        program: kramers_fokker_planck(t)?,
        initial,
        expected,
        tolerance: 1e-7,
    })
}

/// The standard reference cases at time `t` on grids that resolve them.
pub fn analytic_references<T: Real>(t: T) -> Result<Vec<ReferenceCase<T>>> {
    let line = Grid::cube(1, 128, 10.0)?;
    let square = Grid::cube(2, 64, 10.0)?;
    let phase = Grid::new(vec![128, 128], vec![(-40.0, 40.0), (-10.0, 10.0)])?;
    let wide = Grid::cube(1, 256, 16.0)?;
    let theta = t;
    let lambda = (t * lit::<T>(0.5)).exp();
    Ok(vec![
        harmonic_ground_state(&line, t)?,
        harmonic_ground_state(&square, t)?,
        rotated_gaussian(&square, theta)?,
        dilated_gaussian(&wide, lambda)?,
        fokker_planck_maxwellian(&phase, t)?,
        kramers_fokker_planck_decay(&phase, t)?,
    ])
}
