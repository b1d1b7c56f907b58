//! Brute-force and closed-form references used to check splittings on grids.

pub mod baselines;
pub mod references;
pub mod semigroup;
pub mod weyl;

pub use baselines::{strang, strang_harmonic};
pub use references::{analytic_references, ReferenceCase};
pub use semigroup::{dense_action, dense_semigroup};
pub use weyl::{commutator_defect, discretize_weyl, field_to_vector, resolved_test_vectors, vector_to_field, DenseOperator, MAX_DENSE_POINTS};
