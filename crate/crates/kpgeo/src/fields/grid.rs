use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::planar::PlanarDomainGrid;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Scalar carried by a [`GridField`]: real potentials or complex disc data.
pub trait Value:
    Copy + Send + Sync + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
    fn to_c64(self) -> C64;
    fn from_c64(v: C64) -> Self;
}

impl Value for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn from_c64(v: C64) -> Self {
        v.re
    }
}

impl Value for C64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn to_c64(self) -> C64 {
        self
    }
    fn from_c64(v: C64) -> Self {
        v
    }
}

/// Uniform grid on the flat torus `R²/(period·Z²)` with coordinates `z = x + iy`.
///
/// `ny = 1` represents fields that do not depend on `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub nx: usize,
    pub ny: usize,
    pub period: f64,
}

impl TorusGrid {
    pub fn new(nx: usize, ny: usize) -> Self {
        assert!(nx > 0 && ny > 0, "torus grid needs at least one point per direction");
        Self { nx, ny, period: 2.0 * PI }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hx(&self) -> f64 {
        self.period / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.period / self.ny as f64
    }

    pub fn index(&self, ix: isize, iy: isize) -> usize {
        let nx = self.nx as isize;
        let ny = self.ny as isize;
        (iy.rem_euclid(ny) * nx + ix.rem_euclid(nx)) as usize
    }

    pub fn point(&self, j: usize) -> (f64, f64) {
        let ix = j % self.nx;
        let iy = j / self.nx;
        (ix as f64 * self.hx(), iy as f64 * self.hy())
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|j| {
                let (x, y) = self.point(j);
                f(x, y)
            })
            .collect()
    }

    /// Hölder axes of the torus; directions with a single node are dropped.
    pub fn axes(&self) -> Vec<Axis> {
        let mut out = Vec::new();
        out.push(Axis::periodic(self.nx, self.hx()));
        out.push(Axis::periodic(self.ny, self.hy()));
        out
    }
}

/// One direction of a tensor grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub spacing: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn periodic(n: usize, spacing: f64) -> Self {
        Self { n, spacing, periodic: true }
    }
    pub fn bounded(n: usize, spacing: f64) -> Self {
        Self { n, spacing, periodic: false }
    }
}

/// The rectangle `[-2,2] × [0,1]` in `(θ,t)` with both edges included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowGrid {
    pub half_width: f64,
    pub n_theta: usize,
    pub n_t: usize,
}

impl WindowGrid {
    /// Window with `cells_t` cells across `t` and the same spacing in `θ`.
    pub fn with_cells(cells_t: usize) -> Self {
        let half_width = 2.0;
        let n_theta = (2.0 * half_width * cells_t as f64).round() as usize + 1;
        Self { half_width, n_theta, n_t: cells_t + 1 }
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h_theta(&self) -> f64 {
        2.0 * self.half_width / (self.n_theta - 1) as f64
    }

    pub fn h_t(&self) -> f64 {
        1.0 / (self.n_t - 1) as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h_theta()
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.h_t()
    }

    /// Node index with `θ` slowest and `t` fastest.
    pub fn index(&self, i_theta: usize, k_t: usize) -> usize {
        i_theta * self.n_t + k_t
    }

    pub fn node(&self, p: usize) -> (f64, f64) {
        (self.theta(p / self.n_t), self.t(p % self.n_t))
    }

    /// `τ = t + iθ` at node `p`.
    pub fn tau(&self, p: usize) -> C64 {
        let (theta, t) = self.node(p);
        C64::new(t, theta)
    }

    pub fn centre_column(&self) -> usize {
        (self.n_theta - 1) / 2
    }
}

/// Uniform nodes on `[0,1]` with both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalGrid {
    pub n_t: usize,
}

impl IntervalGrid {
    pub fn with_steps(steps: usize) -> Self {
        Self { n_t: steps + 1 }
    }
    pub fn h(&self) -> f64 {
        1.0 / (self.n_t - 1) as f64
    }
    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.h()
    }
}

/// Where the planar part of a field lives.
#[derive(Clone, Debug)]
pub enum Support {
    Torus,
    /// Closed boundary curve sampled uniformly in its parameter.
    Boundary { nodes: usize, length: f64 },
    Window(WindowGrid),
    Interval(IntervalGrid),
    /// Open polyline of uniformly spaced nodes (e.g. one edge of the window).
    Segment { nodes: usize, spacing: f64 },
    Planar(Arc<PlanarDomainGrid>),
}

impl Support {
    pub fn planar_len(&self) -> usize {
        match self {
            Support::Torus => 1,
            Support::Boundary { nodes, .. } => *nodes,
            Support::Window(w) => w.len(),
            Support::Interval(g) => g.n_t,
            Support::Segment { nodes, .. } => *nodes,
            Support::Planar(g) => g.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Support::Torus => "torus",
            Support::Boundary { .. } => "boundary",
            Support::Window(_) => "window",
            Support::Interval(_) => "interval",
            Support::Segment { .. } => "segment",
            Support::Planar(g) => g.kind.name(),
        }
    }

    fn same_shape(&self, other: &Support) -> bool {
        match (self, other) {
            (Support::Torus, Support::Torus) => true,
            (Support::Boundary { nodes: a, .. }, Support::Boundary { nodes: b, .. }) => a == b,
            (Support::Window(a), Support::Window(b)) => a == b,
            (Support::Interval(a), Support::Interval(b)) => a == b,
            (Support::Segment { nodes: a, .. }, Support::Segment { nodes: b, .. }) => a == b,
            (Support::Planar(a), Support::Planar(b)) => Arc::ptr_eq(a, b) || a.len() == b.len(),
            _ => false,
        }
    }
}

/// Samples of a function on (planar support) × torus.
///
/// Storage is planar-node major, then torus index (`iy·nx + ix`), then component.
#[derive(Clone, Debug)]
pub struct GridField<T: Value> {
    pub support: Support,
    pub torus: TorusGrid,
    pub components: usize,
    pub values: Vec<T>,
}

pub type RealField = GridField<f64>;
pub type ComplexField = GridField<C64>;

impl<T: Value> GridField<T> {
    pub fn zeros(support: Support, torus: TorusGrid) -> Self {
        let n = support.planar_len() * torus.len();
        Self { support, torus, components: 1, values: vec![T::default(); n] }
    }

    pub fn from_values(support: Support, torus: TorusGrid, values: Vec<T>) -> Result<Self> {
        let n = support.planar_len() * torus.len();
        if values.len() != n {
            return Err(Error::Shape(format!("expected {n} values, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite value".into()));
        }
        Ok(Self { support, torus, components: 1, values })
    }

    pub fn torus_field(torus: TorusGrid, values: Vec<T>) -> Self {
        assert_eq!(values.len(), torus.len());
        Self { support: Support::Torus, torus, components: 1, values }
    }

    pub fn planar_len(&self) -> usize {
        self.support.planar_len()
    }

    pub fn slice(&self, p: usize) -> &[T] {
        let m = self.torus.len() * self.components;
        &self.values[p * m..(p + 1) * m]
    }

    pub fn slice_mut(&mut self, p: usize) -> &mut [T] {
        let m = self.torus.len() * self.components;
        &mut self.values[p * m..(p + 1) * m]
    }

    pub fn at(&self, p: usize, j: usize) -> T {
        self.values[p * self.torus.len() + j]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.torus == other.torus
            && self.components == other.components
            && self.support.same_shape(&other.support)
    }

    fn check(&self, other: &Self) {
        assert!(self.same_layout(other), "field layouts differ");
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Self { values, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Self { values, ..self.clone() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.check(other);
        for (x, &y) in self.values.iter_mut().zip(&other.values) {
            *x = *x + y * a;
        }
    }

    pub fn dist_sup(&self, other: &Self) -> f64 {
        self.check(other);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (&a, &b)| m.max((a - b).modulus()))
    }

    /// Tensor axes of the field (planar axes first, then torus axes) and,
    /// for masked planar grids, the map from box index to stored node.
    pub fn tensor_axes(&self) -> (Vec<Axis>, Option<Vec<Option<usize>>>) {
        let mut axes = Vec::new();
        let mut mask = None;
        match &self.support {
            Support::Torus => {}
            Support::Boundary { nodes, length } => {
                axes.push(Axis::periodic(*nodes, length / *nodes as f64))
            }
            Support::Window(w) => {
                axes.push(Axis::bounded(w.n_theta, w.h_theta()));
                axes.push(Axis::bounded(w.n_t, w.h_t()));
            }
            Support::Interval(g) => axes.push(Axis::bounded(g.n_t, g.h())),
            Support::Segment { nodes, spacing } => axes.push(Axis::bounded(*nodes, *spacing)),
            Support::Planar(g) => {
                axes.push(Axis::bounded(g.box_ny, g.h));
                axes.push(Axis::bounded(g.box_nx, g.h));
                mask = Some(g.box_to_node());
            }
        }
        // torus: y slow, x fast; listed slowest first to match storage order
        axes.push(Axis::periodic(self.torus.ny, self.torus.hy()));
        axes.push(Axis::periodic(self.torus.nx, self.torus.hx()));
        (axes, mask)
    }
}

impl RealField {
    pub fn to_complex(&self) -> ComplexField {
        GridField {
            support: self.support.clone(),
            torus: self.torus,
            components: self.components,
            values: self.values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }
}

impl ComplexField {
    pub fn re(&self) -> RealField {
        GridField {
            support: self.support.clone(),
            torus: self.torus,
            components: self.components,
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }
}
