pub mod affine_split;
pub mod closed_form;
pub mod shear;

pub use affine_split::{affine_linear_split, translate_conjugate_split, TranslationSplit};
pub use closed_form::*;
pub use shear::{rotation_nd, rotation_nd_blocks, shear_factorize, RotationBlocks};
