//! Piecewise-constant paths in the Lie algebra, gauge paths and the parallel transport map.

pub mod codec;
pub mod develop;
pub mod discrete;
pub mod gauge;
pub mod homogeneous;

pub use develop::{develop, develop_smooth, phi, phi_differential};
pub use discrete::{canonical_reflection, check_grid, l2_inner, split_horizontal, t_mid, DiscretePath};
pub use gauge::{gauge_act, gauge_act_midpoint, gauge_push_tangent, GaugePath};
pub use homogeneous::{CosetPoint, HomogeneousSetup};
