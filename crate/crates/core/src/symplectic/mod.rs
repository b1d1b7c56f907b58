pub mod affine;
pub mod bounded;
pub mod flow;
pub mod symbol;

pub use affine::{affine_flow, compose_affine, kappa_series, AffineFlow};
pub use bounded::{lower_bound_decompose, LowerBound};
pub use flow::{hamiltonian_flow, FlowMatrix, SpPlusCheck};
pub use symbol::{Coordinates, QuadraticSymbol, SymbolRecord};
