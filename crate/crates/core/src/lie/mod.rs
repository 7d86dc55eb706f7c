//! Compact matrix Lie groups and their algebras.

pub mod algebra;
pub mod automorphism;
pub mod builders;
pub mod group;

pub use algebra::{bracket, inner, project, split_center, AlgebraElement, InnerForm, LieAlgebra, SubalgebraSplit};
pub use automorphism::{AutomorphismDesc, AutomorphismKind, AutomorphismSpec};
pub use builders::GroupSpec;
pub use group::{adjoint, adjoint_matrix, exp_map, GroupElement, GroupKind, LieGroup};
