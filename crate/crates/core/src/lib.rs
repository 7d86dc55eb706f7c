//! Parallel transport maps over compact matrix Lie groups.
//!
//! Paths `u: [0,1] -> g` are developed into the group, `Phi(u) = E_u(1)`,
//! and the second fundamental forms and shape operators of fibers,
//! preimages `Phi^{-1}(N)` and gauge orbits are assembled on truncated
//! bases. On top sit verdict engines for austere, totally geodesic,
//! minimal and weakly reflective submanifolds, and a JSON experiment runner.

pub mod error;
pub mod linalg;
pub mod base;
pub mod lie;
pub mod path;
pub mod oracle;
pub mod pf;
pub mod verdict;
pub mod experiment;

pub use error::{Error, Result};
