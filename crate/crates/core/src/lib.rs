pub mod catalog;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod matfun;
pub mod oracles;
pub mod program;
pub mod scalar;
pub mod splitter;
pub mod symplectic;

pub use error::{Result, SplitError};
pub use program::{Provenance, SplitStep, SplittingProgram};
pub use scalar::Real;
pub use splitter::{verify_program, SplitReport};
pub use symplectic::{AffineFlow, FlowMatrix, QuadraticSymbol};

pub type Symbol64 = QuadraticSymbol<f64>;
pub type Flow64 = FlowMatrix<f64>;
pub type AffineFlow64 = AffineFlow<f64>;
pub type Program64 = SplittingProgram<f64>;
pub type Step64 = SplitStep<f64>;
pub type Symbol32 = QuadraticSymbol<f32>;
pub type Program32 = SplittingProgram<f32>;
