//! Grid representations of functions on planar domains × torus.

pub mod compose;
pub mod grid;
pub mod holder;
pub mod interp;
pub mod planar;
pub mod snapshot;
pub mod spectral;

pub use compose::{compose, trace, GridMap};
pub use grid::{Axis, ComplexField, GridField, IntervalGrid, RealField, Support, TorusGrid, Value, WindowGrid, C64};
pub use holder::{holder_norm, interpolation_check, HolderIndex, NormReport};
pub use planar::{Circle, ClosedCurve, DomainKind, Neighbor, PlanarDomainGrid, StadiumCurve};
pub use spectral::{TorusSpectral, TrigInterp1, TrigInterp2};
