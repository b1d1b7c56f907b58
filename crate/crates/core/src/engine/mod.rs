//! Execution of splitting programs on periodic grids with FFT-based sub-steps.

pub mod exec;
pub mod field;
pub mod grid;
pub mod io;

pub use exec::{apply_step, execute, ExecOptions, ExecutionReport, ExecutionStats, SpectralEngine, StepDiagnostic};
pub use field::{l2_error, l2_norm, Space, StateField};
pub use grid::Grid;
pub use io::{read_field, write_diagnostics, write_field, FieldMeta};
