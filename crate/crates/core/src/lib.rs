//! Surface one-forms, a block SO(6) Lax pair and the sine-Gordon reduction.
//!
//! The crate evaluates the structure equations of a surface described by
//! moving-frame one-forms, checks them against the zero-curvature condition
//! of a block-diagonal Lax pair, solves the sine-Gordon reduction and
//! rebuilds the immersed surface to compare its discrete curvature with the
//! second fundamental form.
//!
//! Modules, bottom up:
//!
//! - [`algebra`]: 3x3/6x6 matrices, skew triples, rotation exponential.
//! - [`fields`]: grids, sampled fields with optional closed forms, stencils, scenario families.
//! - [`structure`]: connection forms, structure residuals, curvature, fundamental forms.
//! - [`laxpair`]: Lax matrices, zero-curvature residuals, constraint branches, equivalence.
//! - [`sine_gordon`]: kink oracle, coefficient mapping, explicit solver, energy.
//! - [`frame`]: frame transport, path defect, reconstruction, discrete curvature.

pub mod algebra;
mod error;
pub mod fields;
pub mod fmt;
pub mod frame;
pub mod laxpair;
pub mod sine_gordon;
pub mod structure;

pub use algebra::{
    block_diag, commutator, orthonormality_defect, rodrigues_exp, skew_from_triple, Mat3, Matrix6, Rotation3,
    SkewTriple,
};
pub use error::{Error, Result};
pub use fields::{sample_family, CoefficientSet, DerivativeStrategy, Family, GridSpec, ScalarField, SecondFormCoeffs};
pub use frame::{discrete_forms, path_defect, propagate_frames, reconstruct_surface, FrameField, SurfaceMesh};
pub use laxpair::{
    classify_branch, constraint_field, equivalence_report, zero_curvature_residuals, Branch, BranchClass, LaxPairAt,
};
pub use sine_gordon::{KinkParams, SGState};
pub use structure::{build_forms, curvatures, first_fundamental_coeffs, residuals_structure, ResidualReport};
