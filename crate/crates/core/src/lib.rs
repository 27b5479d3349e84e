//! Geometry of naturally reductive homogeneous spaces from Lie-algebra data.
//!
//! The crate builds compact homogeneous spaces out of structure constants and
//! an invariant inner product, computes their intrinsic geometry at the base
//! point (difference tensor, curvature and its covariant derivatives, Jacobi
//! and Cartan operators), decides which tangent subspaces are totally
//! geodesic, classifies them against a catalog of known submanifolds of the
//! homogeneous nearly Kähler 6-manifolds, and carries the same analysis over
//! to Riemannian cones.

pub mod classify;
pub mod cones;
pub mod error;
pub mod homgeo;
pub mod liealg;
pub mod modelspaces;
pub mod nkstruct;
pub mod numkernel;
pub mod tol;

pub use error::{Error, Result};
pub use tol::Tolerance;
