//! Arithmetic random waves on the three-torus restricted to planar patches.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: the frequency set of integer vectors on a sphere of radius `√m`.
//! * [`plane`]: exact surd normals, their arithmetic type, the orthonormal frame
//!   of a plane and its projection matrix.
//! * [`regions`]: spherical caps and segments, exact point counts, the maximal
//!   number of points on a plane, Riesz energies and three-regime pair counts.
//! * [`sums`]: the stationary covariance and its jet, the pairwise exponential
//!   sum over the patch and the second-moment identities.
//! * [`sim`]: Gaussian sampling of the ensemble, grid evaluation on a patch,
//!   nodal length by marching squares and Monte Carlo moments.
//!
//! All floating point reductions go through [`reduce`], which fixes the
//! summation tree so results do not depend on the number of worker threads.

pub mod contour;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod plane;
pub mod quad;
pub mod reduce;
pub mod regions;
pub mod sim;
pub mod sums;
pub mod vec3;

pub use error::{Error, Result};
pub use lattice::{enumerate_frequencies, is_admissible, representation_count, Frequency, FrequencySet};
pub use plane::{build_frame, classify_normal, projection_matrix, Frame, NormalComponent, PlaneSpec, PlaneType, ProjectionMatrix};

/// Crate version, embedded into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
