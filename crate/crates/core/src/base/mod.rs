//! Finite-dimensional orbit geometry in `G` and `G/K`.

pub mod hspec;
pub mod membership;
pub mod orbit;

pub use hspec::{HKind, HSpec};
pub use membership::{group_distance, orbit_membership, Membership, MembershipOptions};
pub use orbit::{pi_preimage_geometry, NKind, NSpec, NormalVector, OrbitGeometry, PreimageGeometry};
