//! Weighted Diophantine approximation over number fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`] exact arithmetic in `O_K`, Archimedean embeddings, norms,
//!   units and principal ideals;
//! * [`lattice`] the lattices `Λ_ϑ ⊂ K_S^d`, the diagonal flow and point
//!   enumeration;
//! * [`diophantine`] weighted quasi-norms, the regions `E_{T,c}`, analytic
//!   and Monte Carlo volumes, approximate counting and error series;
//! * [`spiralling`] weighted projections onto spheres and directional counts;
//! * [`moments`] translate averages, second moments, zeta and unit sums,
//!   combinatorial counts and the time-average sandwich.

pub mod diophantine;
pub mod error;
pub mod field;
pub mod intmat;
pub mod lattice;
pub mod moments;
pub mod presets;
pub mod rng;
pub mod spiralling;

pub use error::{Error, Result};
pub use field::{AlgInt, FieldHandle, KElement, PlaceInfo, PlaceKind};
pub use lattice::{FlowParams, KSVec, LatticeSpec, Theta};
pub use diophantine::{RegionKind, RegionSpec, WeightScheme};

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative tolerance used when comparing embedded (floating point) values.
pub const EMBED_TOL: f64 = 1e-9;
