use exsplit::SplitError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Split(#[from] SplitError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 verification failure, 3 divergence, 4 configuration, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 2,
            CliError::Split(SplitError::Divergence { .. }) => 3,
            CliError::Config(_) => 4,
            CliError::Split(
                SplitError::NearSingularAngle { .. }
                | SplitError::InvalidParameter(_)
                | SplitError::Grid(_)
                | SplitError::DimensionMismatch { .. }
                | SplitError::ZeroDimension
                | SplitError::Aliasing { .. }
                | SplitError::SizeCap { .. },
            ) => 4,
            _ => 1,
        }
    }
}
