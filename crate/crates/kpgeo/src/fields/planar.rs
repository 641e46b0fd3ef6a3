//! Planar domains: boundary curves and masked Cartesian grids.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use super::grid::C64;
use crate::error::{Error, Result};

/// A closed, counterclockwise, smooth planar curve with a periodic parameter.
///
/// Points use the strip convention `τ = t + iθ` (real part `t`).
pub trait ClosedCurve: Send + Sync + Debug {
    /// Period of the parameter.
    fn length(&self) -> f64;
    /// Point and its first two parameter derivatives.
    fn eval(&self, s: f64) -> (C64, C64, C64);
    fn contains(&self, p: C64) -> bool;
    /// Lower-left and upper-right corners of a bounding box.
    fn bbox(&self) -> (C64, C64);
    /// Parameter of a point lying on (or within rounding of) the curve.
    fn param_of(&self, p: C64) -> f64;

    fn point(&self, s: f64) -> C64 {
        self.eval(s).0
    }
}

/// Circle traversed counterclockwise by arclength, starting at angle `start`.
#[derive(Clone, Debug)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
    pub start: f64,
}

impl Circle {
    pub fn unit() -> Self {
        Self { center: C64::new(0.0, 0.0), radius: 1.0, start: -PI / 2.0 }
    }
}

impl ClosedCurve for Circle {
    fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }
    fn eval(&self, s: f64) -> (C64, C64, C64) {
        let a = self.start + s / self.radius;
        let e = C64::from_polar(1.0, a);
        (
            self.center + e * self.radius,
            e * C64::i(),
            -e / self.radius,
        )
    }
    fn contains(&self, p: C64) -> bool {
        (p - self.center).norm() < self.radius
    }
    fn bbox(&self) -> (C64, C64) {
        let r = C64::new(self.radius, self.radius);
        (self.center - r, self.center + r)
    }
    fn param_of(&self, p: C64) -> f64 {
        let a = (p - self.center).arg() - self.start;
        a.rem_euclid(2.0 * PI) * self.radius
    }
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Half of the superellipse `|x/b|^p + |y/a|^p = 1` used for the strip caps.
#[derive(Clone, Debug)]
pub struct SuperellipseCap {
    pub b: f64,
    pub a: f64,
    pub p: f64,
    table_psi: Vec<f64>,
    table_s: Vec<f64>,
}

impl SuperellipseCap {
    pub fn new(b: f64, a: f64, p: f64) -> Self {
        let m = 2048;
        let mut table_psi = Vec::with_capacity(m + 1);
        let mut table_s = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        let mut cap = Self { b, a, p, table_psi: vec![], table_s: vec![] };
        for k in 0..=m {
            let psi = PI * k as f64 / m as f64;
            if k > 0 {
                acc += cap.speed_integral(table_psi[k - 1], psi);
            }
            table_psi.push(psi);
            table_s.push(acc);
        }
        cap.table_psi = table_psi;
        cap.table_s = table_s;
        cap
    }

    fn speed_integral(&self, lo: f64, hi: f64) -> f64 {
        let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        GL8.iter().map(|&(x, w)| w * self.local(m + r * x).1.norm()).sum::<f64>() * r
    }

    /// Radius function `r(ψ)` and its first two derivatives.
    fn radius(&self, psi: f64) -> (f64, f64, f64) {
        let p = self.p;
        let (c, s) = (psi.cos(), psi.sin());
        let (ac, as_) = (c.abs(), s.abs());
        let q = ac.powf(p) + as_.powf(p);
        let dq = p * (as_.powf(p - 1.0) * s.signum() * c - ac.powf(p - 1.0) * c.signum() * s);
        let d2q = p * (p - 1.0) * (as_.powf(p - 2.0) * c * c + ac.powf(p - 2.0) * s * s)
            - p * (as_.powf(p - 1.0) * s.abs() + ac.powf(p - 1.0) * c.abs());
        let r = q.powf(-1.0 / p);
        let dr = -(1.0 / p) * q.powf(-1.0 / p - 1.0) * dq;
        let d2r = (1.0 / p) * (1.0 / p + 1.0) * q.powf(-1.0 / p - 2.0) * dq * dq
            - (1.0 / p) * q.powf(-1.0 / p - 1.0) * d2q;
        (r, dr, d2r)
    }

    /// Offset from the centre and its ψ-derivatives.
    pub fn local(&self, psi: f64) -> (C64, C64, C64) {
        let (r, dr, d2r) = self.radius(psi);
        let (c, s) = (psi.cos(), psi.sin());
        let z = C64::new(self.b * r * c, self.a * r * s);
        let z1 = C64::new(self.b * (dr * c - r * s), self.a * (dr * s + r * c));
        let z2 = C64::new(
            self.b * (d2r * c - 2.0 * dr * s - r * c),
            self.a * (d2r * s + 2.0 * dr * c - r * s),
        );
        (z, z1, z2)
    }

    /// Arclength of the half cap (ψ from 0 to π).
    pub fn half_length(&self) -> f64 {
        *self.table_s.last().unwrap()
    }

    /// Arclength from ψ = 0 to `psi ∈ [0, π]`.
    pub fn arclength(&self, psi: f64) -> f64 {
        let m = self.table_psi.len() - 1;
        let k = ((psi / PI * m as f64).floor() as usize).min(m - 1);
        self.table_s[k] + self.speed_integral(self.table_psi[k], psi)
    }

    /// Inverse of [`Self::arclength`].
    pub fn psi_of(&self, s: f64) -> f64 {
        let k = match self.table_s.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(k) => return self.table_psi[k],
            Err(k) => k.clamp(1, self.table_s.len() - 1),
        };
        let (s0, s1) = (self.table_s[k - 1], self.table_s[k]);
        let (p0, p1) = (self.table_psi[k - 1], self.table_psi[k]);
        let mut psi = p0 + (p1 - p0) * (s - s0) / (s1 - s0);
        for _ in 0..8 {
            let f = s0 + self.speed_integral(p0, psi) - s;
            psi -= f / self.local(psi).1.norm();
        }
        psi
    }

    /// Point, first and second arclength derivatives of the upper half at arclength `s`.
    pub fn upper(&self, s: f64) -> (C64, C64, C64) {
        arclength_derivs(self.local(self.psi_of(s)))
    }

    /// Same for the lower half (ψ from π to 2π), arclength measured from ψ = π.
    pub fn lower(&self, s: f64) -> (C64, C64, C64) {
        arclength_derivs(self.local(PI + self.psi_of(s)))
    }

    pub fn inside(&self, d: C64) -> bool {
        (d.re / self.b).abs().powf(self.p) + (d.im / self.a).abs().powf(self.p) < 1.0
    }
}

fn arclength_derivs((z, z1, z2): (C64, C64, C64)) -> (C64, C64, C64) {
    let sp = z1.norm();
    let t = z1 / sp;
    let dsp = (z2 * z1.conj()).re / sp;
    (z, t, (z2 - t * dsp) / (sp * sp))
}

/// Boundary of the long strip region: the sides `t = 0, 1` for `|θ| ≤ Θ` closed by
/// superellipse caps centred at `θ = ±Θ`.
///
/// The parameter is arclength starting at `τ = 0` and running down the left side first.
#[derive(Clone, Debug)]
pub struct StadiumCurve {
    pub theta: f64,
    pub cap: Arc<SuperellipseCap>,
}

impl StadiumCurve {
    pub fn new(theta: f64) -> Self {
        Self { theta, cap: Arc::new(SuperellipseCap::new(0.5, 0.7, 6.0)) }
    }

    fn lc(&self) -> f64 {
        self.cap.half_length()
    }

    /// Start parameters of the five pieces (left-lower, bottom cap, right, top cap, left-upper).
    pub fn breaks(&self) -> [f64; 5] {
        let (th, lc) = (self.theta, self.lc());
        [0.0, th, th + lc, 3.0 * th + lc, 3.0 * th + 2.0 * lc]
    }

    /// Whether parameter `s` lies on a cap; returns `Some(+1)` for the top cap, `Some(-1)` for the bottom.
    pub fn cap_side(&self, s: f64) -> Option<i32> {
        let b = self.breaks();
        let s = s.rem_euclid(self.length());
        if s >= b[1] && s < b[2] {
            Some(-1)
        } else if s >= b[3] && s < b[4] {
            Some(1)
        } else {
            None
        }
    }
}

impl ClosedCurve for StadiumCurve {
    fn length(&self) -> f64 {
        4.0 * self.theta + 2.0 * self.lc()
    }

    fn eval(&self, s: f64) -> (C64, C64, C64) {
        let s = s.rem_euclid(self.length());
        let b = self.breaks();
        let th = self.theta;
        let zero = C64::default();
        if s < b[1] {
            (C64::new(0.0, -s), C64::new(0.0, -1.0), zero)
        } else if s < b[2] {
            let (z, z1, z2) = self.cap.lower(s - b[1]);
            (C64::new(0.5, -th) + z, z1, z2)
        } else if s < b[3] {
            (C64::new(1.0, -th + (s - b[2])), C64::new(0.0, 1.0), zero)
        } else if s < b[4] {
            let (z, z1, z2) = self.cap.upper(s - b[3]);
            (C64::new(0.5, th) + z, z1, z2)
        } else {
            (C64::new(0.0, th - (s - b[4])), C64::new(0.0, -1.0), zero)
        }
    }

    fn contains(&self, p: C64) -> bool {
        if !(p.re > 0.0 && p.re < 1.0) {
            return false;
        }
        let th = p.im.abs();
        if th <= self.theta {
            return true;
        }
        self.cap.inside(C64::new(p.re - 0.5, th - self.theta))
    }

    fn bbox(&self) -> (C64, C64) {
        let h = self.theta + self.cap.a;
        (C64::new(0.0, -h), C64::new(1.0, h))
    }

    fn param_of(&self, p: C64) -> f64 {
        let b = self.breaks();
        let th = self.theta;
        if p.im.abs() <= th {
            if p.re < 0.5 {
                if p.im <= 0.0 {
                    -p.im
                } else {
                    b[4] + (th - p.im)
                }
            } else {
                b[2] + (p.im + th)
            }
        } else if p.im > 0.0 {
            let d = p - C64::new(0.5, th);
            let psi = (d.im / self.cap.a).atan2(d.re / self.cap.b).clamp(0.0, PI);
            b[3] + self.cap.arclength(psi)
        } else {
            let d = p - C64::new(0.5, -th);
            let psi = (d.im / self.cap.a).atan2(d.re / self.cap.b).rem_euclid(2.0 * PI);
            let psi = (psi - PI).clamp(0.0, PI);
            b[1] + self.cap.arclength(psi)
        }
    }
}

/// Axis-aligned rectangle, counterclockwise from its lower-left corner.
#[derive(Clone, Debug)]
pub struct Rectangle {
    pub lo: C64,
    pub hi: C64,
}

impl ClosedCurve for Rectangle {
    fn length(&self) -> f64 {
        let d = self.hi - self.lo;
        2.0 * (d.re + d.im)
    }
    fn eval(&self, s: f64) -> (C64, C64, C64) {
        let d = self.hi - self.lo;
        let s = s.rem_euclid(self.length());
        let zero = C64::default();
        if s < d.re {
            (self.lo + s, C64::new(1.0, 0.0), zero)
        } else if s < d.re + d.im {
            (C64::new(self.hi.re, self.lo.im + s - d.re), C64::new(0.0, 1.0), zero)
        } else if s < 2.0 * d.re + d.im {
            (C64::new(self.hi.re - (s - d.re - d.im), self.hi.im), C64::new(-1.0, 0.0), zero)
        } else {
            (C64::new(self.lo.re, self.hi.im - (s - 2.0 * d.re - d.im)), C64::new(0.0, -1.0), zero)
        }
    }
    fn contains(&self, p: C64) -> bool {
        p.re > self.lo.re && p.re < self.hi.re && p.im > self.lo.im && p.im < self.hi.im
    }
    fn bbox(&self) -> (C64, C64) {
        (self.lo, self.hi)
    }
    fn param_of(&self, p: C64) -> f64 {
        let d = self.hi - self.lo;
        let dists = [
            (p.im - self.lo.im).abs(),
            (p.re - self.hi.re).abs(),
            (p.im - self.hi.im).abs(),
            (p.re - self.lo.re).abs(),
        ];
        let side = (0..4).min_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap()).unwrap();
        match side {
            0 => p.re - self.lo.re,
            1 => d.re + p.im - self.lo.im,
            2 => d.re + d.im + self.hi.re - p.re,
            _ => 2.0 * d.re + d.im + self.hi.im - p.im,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Disc,
    StadiumStrip,
    RectangleWindow,
}

impl DomainKind {
    pub fn name(&self) -> &'static str {
        match self {
            DomainKind::Disc => "disc",
            DomainKind::StadiumStrip => "stadium",
            DomainKind::RectangleWindow => "rectangle",
        }
    }
}

/// Where a grid neighbour of an interior node lies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Neighbor {
    Node(usize),
    /// Curve crossing at fraction `frac ∈ (0, 1]` of the spacing, with curve parameter `s`.
    Boundary { frac: f64, s: f64 },
}

/// Cartesian nodes of a planar domain followed by uniform samples of its boundary curve.
#[derive(Debug)]
pub struct PlanarDomainGrid {
    pub kind: DomainKind,
    pub curve: Arc<dyn ClosedCurve>,
    pub h: f64,
    pub origin: C64,
    pub box_nx: usize,
    pub box_ny: usize,
    /// Box indices `(ix, iy)` of the interior nodes.
    pub interior: Vec<(usize, usize)>,
    node_of_box: Vec<Option<usize>>,
    /// Neighbours in the order east, west, north, south.
    pub neighbors: Vec<[Neighbor; 4]>,
    pub boundary_samples: usize,
}

impl PlanarDomainGrid {
    /// Grid of spacing `h` aligned so that `anchor` is a lattice point.
    pub fn new(
        kind: DomainKind,
        curve: Arc<dyn ClosedCurve>,
        h: f64,
        anchor: C64,
        boundary_samples: usize,
    ) -> Result<Self> {
        let (lo, hi) = curve.bbox();
        let ix0 = ((lo.re - anchor.re) / h).floor() as i64 - 1;
        let iy0 = ((lo.im - anchor.im) / h).floor() as i64 - 1;
        let ix1 = ((hi.re - anchor.re) / h).ceil() as i64 + 1;
        let iy1 = ((hi.im - anchor.im) / h).ceil() as i64 + 1;
        let box_nx = (ix1 - ix0 + 1) as usize;
        let box_ny = (iy1 - iy0 + 1) as usize;
        let origin = anchor + C64::new(ix0 as f64 * h, iy0 as f64 * h);
        let mut node_of_box = vec![None; box_nx * box_ny];
        let mut interior = Vec::new();
        for iy in 0..box_ny {
            for ix in 0..box_nx {
                let p = origin + C64::new(ix as f64 * h, iy as f64 * h);
                if curve.contains(p) {
                    node_of_box[iy * box_nx + ix] = Some(interior.len());
                    interior.push((ix, iy));
                }
            }
        }
        if interior.is_empty() {
            return Err(Error::InsufficientResolution("no interior grid nodes".into()));
        }
        let mut g = Self {
            kind,
            curve,
            h,
            origin,
            box_nx,
            box_ny,
            interior,
            node_of_box,
            neighbors: vec![],
            boundary_samples,
        };
        g.neighbors = (0..g.interior.len()).map(|k| g.find_neighbors(k)).collect();
        Ok(g)
    }

    /// Unit disc grid with `cells` intervals across the radius.
    pub fn disc(cells: usize, boundary_samples: usize) -> Result<Self> {
        Self::new(
            DomainKind::Disc,
            Arc::new(Circle::unit()),
            1.0 / cells as f64,
            C64::default(),
            boundary_samples,
        )
    }

    pub fn stadium(theta: f64, cells_t: usize, boundary_samples: usize) -> Result<Self> {
        Self::new(
            DomainKind::StadiumStrip,
            Arc::new(StadiumCurve::new(theta)),
            1.0 / cells_t as f64,
            C64::default(),
            boundary_samples,
        )
    }

    fn find_neighbors(&self, k: usize) -> [Neighbor; 4] {
        let (ix, iy) = self.interior[k];
        let p = self.node_pos(k);
        let dirs = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
        dirs.map(|(dx, dy)| {
            let jx = ix as i64 + dx;
            let jy = iy as i64 + dy;
            let q = p + C64::new(dx as f64 * self.h, dy as f64 * self.h);
            if let Some(j) = self.box_node(jx, jy) {
                if self.curve.contains(q) {
                    return Neighbor::Node(j);
                }
            }
            let (mut a, mut b) = (0.0, 1.0);
            let d = q - p;
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if self.curve.contains(p + d * m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            let frac = 0.5 * (a + b);
            Neighbor::Boundary { frac, s: self.curve.param_of(p + d * frac) }
        })
    }

    fn box_node(&self, ix: i64, iy: i64) -> Option<usize> {
        if ix < 0 || iy < 0 || ix >= self.box_nx as i64 || iy >= self.box_ny as i64 {
            return None;
        }
        self.node_of_box[iy as usize * self.box_nx + ix as usize]
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    /// Interior nodes plus boundary samples.
    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary_samples
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node_pos(&self, k: usize) -> C64 {
        let (ix, iy) = self.interior[k];
        self.origin + C64::new(ix as f64 * self.h, iy as f64 * self.h)
    }

    pub fn boundary_param(&self, j: usize) -> f64 {
        self.curve.length() * j as f64 / self.boundary_samples as f64
    }

    pub fn boundary_point(&self, j: usize) -> C64 {
        self.curve.point(self.boundary_param(j))
    }

    /// Position of stored node `p` (interior nodes first, then boundary samples).
    pub fn position(&self, p: usize) -> C64 {
        if p < self.interior.len() {
            self.node_pos(p)
        } else {
            self.boundary_point(p - self.interior.len())
        }
    }

    /// Box index → interior node, for masked tensor views.
    pub fn box_to_node(&self) -> Vec<Option<usize>> {
        self.node_of_box.clone()
    }

    pub fn node_at_box(&self, ix: usize, iy: usize) -> Option<usize> {
        self.box_node(ix as i64, iy as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_parameterization_is_arclength() {
        let c = StadiumCurve::new(6.0);
        let l = c.length();
        for k in 0..400 {
            let s = l * k as f64 / 400.0;
            let (_, d, _) = c.eval(s);
            assert!((d.norm() - 1.0).abs() < 1e-10, "speed {} at {s}", d.norm());
        }
        let b = c.breaks();
        let s = b[3] + 0.3;
        let (z, _, _) = c.eval(s);
        assert!((c.param_of(z) - s).abs() < 1e-10);
        let s = b[1] + 0.7;
        let (z, _, _) = c.eval(s);
        assert!((c.param_of(z) - s).abs() < 1e-10);
    }

    #[test]
    fn second_derivative_matches_difference_quotient() {
        let c = StadiumCurve::new(5.0);
        let s = c.breaks()[3] + 0.4;
        let e = 1e-4;
        let fd = (c.point(s + e) - 2.0 * c.point(s) + c.point(s - e)) / (e * e);
        assert!((fd - c.eval(s).2).norm() < 1e-5);
    }

    #[test]
    fn disc_grid_neighbors() {
        let g = PlanarDomainGrid::disc(8, 64).unwrap();
        for (k, nb) in g.neighbors.iter().enumerate() {
            for n in nb {
                if let Neighbor::Boundary { frac, s } = n {
                    assert!(*frac > 0.0 && *frac <= 1.0);
                    let q = g.curve.point(*s);
                    assert!((q.norm() - 1.0).abs() < 1e-12);
                    assert!((q - g.node_pos(k)).norm() <= g.h + 1e-12);
                }
            }
        }
    }
}
