//! Exact pinwheel tilings, pair-distance statistics and radial diffraction.
//!
//! Geometry is exact over the ring of rationals with denominators `2^a 5^b`.
//! Floating point only enters in the diffraction sums and the powder model.

pub mod cli;
pub mod diffraction;
pub mod error;
pub mod exact;
pub mod formats;
pub mod kite_domino;
pub mod lattice;
pub mod stats;
pub mod substitution;

pub use error::{Error, Result};
pub use exact::{DistanceKey, ExactPoint, ExactScalar};
pub use substitution::{generate_patch, Patch, PlacedTriangle};
