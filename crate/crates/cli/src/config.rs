use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use exsplit::catalog::{
    affine_linear_split, dilatation, fokker_planck, harmonic_oscillator, kramers_fokker_planck, rotation2d, rotation_nd, shear_factorize,
};
use exsplit::engine::{read_field, Grid, StateField};
use exsplit::splitter::{schrodinger_coefficients, FixedPointOptions};
use exsplit::symplectic::SymbolRecord;
use exsplit::{Program64, SplitError, Symbol64};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Problem {
    Harmonic,
    Rotation2d,
    Dilatation,
    ShearFactor,
    RotationNd,
    Schrodinger,
    FokkerPlanck,
    Kfp,
    CustomSymbol,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    /// Symmetric potential matrix.
    pub v: Option<Vec<Vec<f64>>>,
    /// Skew magnetic matrix.
    pub b: Option<Vec<Vec<f64>>>,
    /// Transport matrix for `shear_factor` and `rotation_nd`.
    pub m: Option<Vec<Vec<f64>>>,
    pub symbol: Option<SymbolRecord>,
    pub max_iter: Option<usize>,
    pub iteration_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub sizes: Vec<usize>,
    pub bounds: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    Gaussian { center: Vec<f64>, width: f64 },
    File { path: PathBuf },
    /// `ground_state` or `maxwellian`.
    Preset { name: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Dump the field every this many time steps; 0 keeps only the final field.
    #[serde(default)]
    pub dump_every: usize,
    pub diagnostics: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_verify_tol")]
    pub verify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { verify: default_verify_tol() }
    }
}

fn default_verify_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { taus: default_taus() }
    }
}

fn default_taus() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

/// Job description read from a TOML document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub problem: Option<Problem>,
    pub dim: Option<usize>,
    pub t_final: Option<f64>,
    pub n_steps: Option<usize>,
    #[serde(default)]
    pub parameters: Parameters,
    pub grid: Option<GridConfig>,
    pub initial: Option<Initial>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub bench: BenchConfig,
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// TOML job description.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub problem: Option<Problem>,
    /// Spatial dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Final time.
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Points per dimension of a cubic grid.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Half-width of a cubic grid.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Verification tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Bench step sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    /// Previously written program file, used instead of building one.
    #[arg(long)]
    pub program: Option<PathBuf>,
}

pub fn load(over: &Overrides) -> Result<JobConfig, CliError> {
    let mut cfg = match &over.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<JobConfig>(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        }
        None => JobConfig::default(),
    };
    if over.problem.is_some() {
        cfg.problem = over.problem;
    }
    if over.n.is_some() {
        cfg.dim = over.n;
    }
    if over.t.is_some() {
        cfg.t_final = over.t;
    }
    if over.steps.is_some() {
        cfg.n_steps = over.steps;
    }
    if over.theta.is_some() {
        cfg.parameters.theta = over.theta;
    }
    if over.lambda.is_some() {
        cfg.parameters.lambda = over.lambda;
    }
    if let Some(dir) = &over.out {
        cfg.output.dir = Some(dir.clone());
    }
    if let Some(tol) = over.tol {
        cfg.tolerances.verify = tol;
    }
    if let Some(taus) = &over.taus {
        cfg.bench.taus = taus.clone();
    }
    if over.grid.is_some() || over.half_width.is_some() {
        let dim = cfg.dimension()?;
        let size = over.grid.unwrap_or(64);
        let half = over.half_width.unwrap_or(10.0);
        cfg.grid = Some(GridConfig { sizes: vec![size; dim], bounds: vec![[-half, half]; dim] });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn matrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::config(format!("parameter {name} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

impl JobConfig {
    pub fn problem(&self) -> Result<Problem, CliError> {
        self.problem.ok_or_else(|| CliError::config("no problem given (use --problem or `problem = ...`)"))
    }

    pub fn dimension(&self) -> Result<usize, CliError> {
        if let Some(n) = self.dim {
            return Ok(n);
        }
        let from_matrix = |m: &Option<Vec<Vec<f64>>>| m.as_ref().map(|r| r.len());
        Ok(match self.problem()? {
            Problem::Harmonic => 1,
            Problem::Dilatation => 1,
            Problem::Rotation2d | Problem::FokkerPlanck | Problem::Kfp => 2,
            Problem::Schrodinger => from_matrix(&self.parameters.v).or(from_matrix(&self.parameters.b)).unwrap_or(2),
            Problem::ShearFactor | Problem::RotationNd => {
                from_matrix(&self.parameters.m).ok_or_else(|| CliError::config("parameter m is required"))?
            }
            Problem::CustomSymbol => self.parameters.symbol.as_ref().map(|s| s.n).ok_or_else(|| CliError::config("parameter symbol is required"))?,
        })
    }

    pub fn steps(&self) -> usize {
        self.n_steps.unwrap_or(1)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.t_final {
            if !t.is_finite() {
                return Err(CliError::config("t_final must be finite"));
            }
            if t < 0.0 && matches!(self.problem, Some(Problem::Harmonic | Problem::FokkerPlanck | Problem::Kfp)) {
                return Err(CliError::config("t_final must be nonnegative for dissipative problems"));
            }
        }
        if self.n_steps == Some(0) && self.problem.is_some() && self.t_final.map_or(false, |t| t != 0.0) {
            log::info!("zero steps requested; the field is copied unchanged");
        }
        if !(self.tolerances.verify > 0.0) {
            return Err(CliError::config("tolerances.verify must be positive"));
        }
        Ok(())
    }

    fn time_step(&self) -> Result<f64, CliError> {
        let t = self.t_final.ok_or_else(|| CliError::config("t_final is required (use --t)"))?;
        Ok(t / self.steps().max(1) as f64)
    }

    fn options(&self) -> FixedPointOptions {
        let mut o = FixedPointOptions::default();
        if let Some(m) = self.parameters.max_iter {
            o.max_iter = m;
        }
        if let Some(t) = self.parameters.iteration_tol {
            o.tol = t;
        }
        o
    }

    /// Program for one time step.
    pub fn build_program(&self) -> Result<Program64, CliError> {
        let n = self.dimension()?;
        let steps = self.steps().max(1) as f64;
        let p = &self.parameters;
        let prog = match self.problem()? {
            Problem::Harmonic => harmonic_oscillator(self.time_step()?, n)?,
            Problem::Rotation2d => {
                let theta = p.theta.or(self.t_final).ok_or_else(|| CliError::config("theta is required"))?;
                rotation2d(theta / steps)?
            }
            Problem::Dilatation => {
                let lambda = p.lambda.ok_or_else(|| CliError::config("lambda is required"))?;
                if !(lambda > 0.0) {
                    return Err(CliError::config("lambda must be positive"));
                }
                dilatation(lambda.powf(1.0 / steps))?
            }
            Problem::ShearFactor => {
                let m = matrix(p.m.as_ref().ok_or_else(|| CliError::config("parameter m is required"))?, "m")?;
                shear_factorize(&m)?
            }
            Problem::RotationNd => {
                let m = matrix(p.m.as_ref().ok_or_else(|| CliError::config("parameter m is required"))?, "m")?;
                rotation_nd(&m, self.time_step()?, &self.options())?
            }
            Problem::Schrodinger => {
                let v = match &p.v {
                    Some(v) => matrix(v, "v")?,
                    None => DMatrix::identity(n, n),
                };
                let b = match &p.b {
                    Some(b) => matrix(b, "b")?,
                    None => {
                        let mut b = DMatrix::zeros(n, n);
                        if n >= 2 {
                            b[(0, 1)] = -1.0;
                            b[(1, 0)] = 1.0;
                        }
                        b
                    }
                };
                if v.nrows() != n || b.nrows() != n {
                    return Err(CliError::config(format!("v and b must be {n}×{n}")));
                }
                schrodinger_coefficients(&v, &b, self.time_step()?, &self.options())?.program()?
            }
            Problem::FokkerPlanck => fokker_planck(self.time_step()?)?,
            Problem::Kfp => kramers_fokker_planck(self.time_step()?)?,
            Problem::CustomSymbol => {
                let rec = p.symbol.as_ref().ok_or_else(|| CliError::config("parameter symbol is required"))?;
                let sym = Symbol64::from_record(rec)?;
                if sym.q().iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
                    return Err(CliError::config(
                        "custom_symbol supports symbols without quadratic part; use a catalog problem for quadratic symbols",
                    ));
                }
                affine_linear_split(&sym, self.time_step()?)?
            }
        };
        Ok(prog)
    }

    pub fn build_grid(&self, dim: usize) -> Result<Grid, CliError> {
        let grid = match &self.grid {
            Some(g) => Grid::new(g.sizes.clone(), g.bounds.iter().map(|b| (b[0], b[1])).collect())?,
            None => match self.problem {
                Some(Problem::FokkerPlanck | Problem::Kfp) => Grid::new(vec![128, 128], vec![(-40.0, 40.0), (-10.0, 10.0)])?,
                _ => Grid::cube(dim, 64, 10.0)?,
            },
        };
        if grid.dim() != dim {
            return Err(CliError::config(format!("grid has {} dimensions, program has {dim}", grid.dim())));
        }
        Ok(grid)
    }

    pub fn initial_field(&self, grid: &Grid) -> Result<StateField<f64>, CliError> {
        let default = match self.problem {
            Some(Problem::FokkerPlanck | Problem::Kfp) => Initial::Preset { name: "maxwellian".into() },
            _ => Initial::Preset { name: "ground_state".into() },
        };
        match self.initial.clone().unwrap_or(default) {
            Initial::Gaussian { center, width } => Ok(StateField::gaussian(grid.clone(), &center, width)?),
            Initial::File { path } => {
                let f = read_field(&path)?;
                if f.grid() != grid {
                    return Err(CliError::config(format!("{} does not match the job grid", path.display())));
                }
                Ok(f)
            }
            Initial::Preset { name } => match name.as_str() {
                "ground_state" => Ok(StateField::gaussian(grid.clone(), &vec![0.0; grid.dim()], 1.0)?),
                "maxwellian" => {
                    let last = grid.dim() - 1;
                    Ok(StateField::from_fn(grid.clone(), move |x: &[f64]| Complex64::new((-x[last] * x[last] / 2.0).exp(), 0.0)))
                }
                other => Err(CliError::config(format!("unknown initial preset {other:?} (ground_state, maxwellian)"))),
            },
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("exsplit-out"))
    }
}

pub fn read_program(path: &Path) -> Result<Program64, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    Program64::from_json(&text).map_err(|e| match e {
        SplitError::Json(_) | SplitError::Format(_) => CliError::config(format!("{}: {e}", path.display())),
        other => other.into(),
    })
}
