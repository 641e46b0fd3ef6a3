//! Linear solvers: Dirichlet families, Riemann–Hilbert families, harmonic functions on the strip.

pub mod banded;
pub mod poisson;
pub mod rh;
pub mod strip_harmonic;

pub use poisson::{poisson_family_solve, PoissonSolver};
pub use rh::{harmonic_conjugate, rh_family_solve};
pub use strip_harmonic::{strip_harmonic, DecayCertificate};
