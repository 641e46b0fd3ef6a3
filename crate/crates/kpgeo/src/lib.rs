//! Numerical construction of geodesics in the space of Kähler potentials on a flat torus.

pub mod error;
pub mod fields;
pub mod holo;
pub mod elliptic;
pub mod smoothing;
pub mod disc_family;
pub mod strip_geodesic;
pub mod oracle;
pub mod potential;
pub mod nash_moser;
pub mod geodesic;
pub mod acceptance;

pub use error::{Error, Result};
pub use fields::{GridField, HolderIndex, TorusGrid, C64};
