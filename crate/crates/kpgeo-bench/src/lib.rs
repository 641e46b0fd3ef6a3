//! Fixtures shared by the benchmarks.

use kpgeo::disc_family::Background;
use kpgeo::fields::{GridField, TorusGrid};
use kpgeo::holo::{HoloDomain, UnitDisc};
use nalgebra::DMatrix;

/// Smooth periodic field on an `n × n` torus.
pub fn torus_field(n: usize) -> GridField<f64> {
    let torus = TorusGrid::square(n);
    GridField::torus_field(torus, torus.sample(|x, y| (x + 0.3 * y).sin() + 0.2 * (3.0 * x).cos() * y.sin()))
}

/// Disc boundary data `ε cos θ cos x` over a flat background.
pub fn disc_case(m: usize, nx: usize, eps: f64) -> (UnitDisc, Background, DMatrix<f64>) {
    let dom = UnitDisc::new(m);
    let torus = TorusGrid::new(nx, 1);
    let data = DMatrix::from_fn(dom.len(), torus.len(), |j, c| eps * dom.angle(j).cos() * torus.point(c).0.cos());
    (dom, Background::flat(torus), data)
}
