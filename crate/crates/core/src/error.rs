use thiserror::Error;

/// Errors raised by the library. Numeric payloads are reported in `f64`
/// regardless of the scalar type used for the computation.
#[derive(Debug, Error)]
pub enum SplitError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("symbol dimension must be at least 1")]
    ZeroDimension,

    #[error("quadratic part is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not bounded below: {0}")]
    NotBoundedBelow(String),

    #[error("near-singular angle {theta}: |theta| must stay below {max_safe}; split the rotation into smaller angles")]
    NearSingularAngle { theta: f64, max_safe: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("matrix logarithm undefined: eigenvalue at distance {distance:e} from the closed negative real axis")]
    LogBranch { distance: f64 },

    #[error("series did not converge after {terms} terms")]
    SeriesDivergence { terms: usize },

    #[error("iteration diverged after {iterations} iterations (residual {residual:e}){}", suggest(.suggested_step))]
    Divergence {
        iterations: usize,
        residual: f64,
        suggested_step: Option<f64>,
    },

    #[error("decomposition assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("aliasing guard: shear displacement {displacement} exceeds half period {half_period} along dim {dim}; use a smaller step")]
    Aliasing {
        dim: usize,
        displacement: f64,
        half_period: f64,
    },

    #[error("size cap exceeded: {size} > {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn suggest(step: &Option<f64>) -> String {
    match step {
        Some(s) => format!("; largest convergent step found: {s}"),
        None => String::new(),
    }
}

pub type Result<T, E = SplitError> = std::result::Result<T, E>;
