//! Strip geometry, the fixed-point map on the window and its linearization.

pub mod geometry;
pub mod ops;
pub mod riemann;

pub use geometry::StripGeometry;
pub use ops::{centre_path, theta_independence, Linearization, StripProblem, StripTriple};
