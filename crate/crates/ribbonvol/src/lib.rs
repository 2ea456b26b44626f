//! Combinatorial moduli spaces of metric ribbon graphs.
//!
//! The crate enumerates ribbon graphs, builds the cones of multicurve
//! intersection vectors, evaluates the combinatorial Thurston volume of the
//! unit ball as an exact rational function of the edge lengths, and studies
//! the integrability of its powers over the moduli space, both analytically
//! (thresholds), numerically (Monte Carlo) and discretely (lattice sums).

pub mod bvol;
pub mod cells;
pub mod curves;
pub mod error;
pub mod latticesum;
pub mod linalg;
mod lp;
pub mod quadrature;
pub mod ribbon;
pub mod scalar;
pub mod thresholds;
pub mod triangulate;

pub use error::{Error, Result};
pub use ribbon::RibbonGraph;
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Default floating scalar.
pub type Float = f64;
