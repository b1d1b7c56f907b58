pub mod generic;
pub mod schrodinger;
pub mod verify;

pub use generic::{generic_fixed_point, FixedPointOptions, FixedPointSolution, SubspaceDecomposition};
pub use schrodinger::{schrodinger_coefficients, schrodinger_symbol, SchrodingerCoefficients};
pub use verify::{verify_program, verify_program_with_tolerance, SplitReport};
