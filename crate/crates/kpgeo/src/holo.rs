//! Holomorphic functions on simply connected planar domains, represented by boundary traces.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, Dyn, LU};

use crate::error::{Error, Result};
use crate::fields::planar::ClosedCurve;
use crate::fields::C64;

/// A simply connected domain with uniformly parameterized boundary nodes.
pub trait HoloDomain: Send + Sync {
    fn len(&self) -> usize;
    fn node(&self, j: usize) -> C64;
    /// Boundary parameter period.
    fn period(&self) -> f64;
    /// Index of the normalization node.
    fn anchor(&self) -> usize;
    /// Harmonic conjugates of the columns of `u`, normalized by `v(anchor) = 0`.
    fn conjugate(&self, u: &DMatrix<f64>) -> DMatrix<f64>;
    /// Weights `W` with `G(points[p]) = Σ_j W[p,j] G(node j)` for holomorphic `G`.
    fn extension(&self, points: &[C64]) -> DMatrix<C64>;
    /// Weights for `G'(points[p])`.
    fn extension_derivative(&self, points: &[C64]) -> DMatrix<C64>;
    fn contains(&self, p: C64) -> bool;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn param(&self, j: usize) -> f64 {
        self.period() * j as f64 / self.len() as f64
    }

    /// Holomorphic completion `u + iv` of real boundary data.
    fn complete(&self, u: &DMatrix<f64>) -> DMatrix<C64> {
        let v = self.conjugate(u);
        u.zip_map(&v, C64::new)
    }

    /// Harmonic extension of the columns of `u` to the points behind `w = extension(points)`.
    fn harmonic_extend(&self, w: &DMatrix<C64>, u: &DMatrix<f64>) -> DMatrix<f64> {
        (w * self.complete(u)).map(|c| c.re)
    }

    /// Trigonometric interpolation weights at boundary parameter `s`.
    fn boundary_weights(&self, s: f64) -> Vec<f64> {
        periodic_interp_weights(self.len(), self.period(), s)
    }

    /// `sup |Im g − Im g(anchor) − C Re g|` over the columns of `g`: zero for boundary
    /// traces of holomorphic functions.
    fn holomorphy_defect(&self, g: &DMatrix<C64>) -> f64 {
        let re = g.map(|c| c.re);
        let cv = self.conjugate(&re);
        let a = self.anchor();
        let mut worst = 0.0f64;
        for c in 0..g.ncols() {
            for j in 0..g.nrows() {
                let d = g[(j, c)].im - g[(a, c)].im - cv[(j, c)];
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

/// Dirichlet-kernel weights for trigonometric interpolation of `n` uniform samples.
pub fn periodic_interp_weights(n: usize, period: f64, s: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = 2.0 * PI * (s / period - j as f64 / n as f64);
            let half = 0.5 * x;
            if half.sin().abs() < 1e-14 {
                return 1.0;
            }
            if n % 2 == 0 {
                (n as f64 * half).sin() * half.cos() / (n as f64 * half.sin())
            } else {
                (n as f64 * half).sin() / (n as f64 * half.sin())
            }
        })
        .collect()
}

/// Dense matrix of the periodic multiplier `+i·sgn(k)` (Nyquist mode removed).
pub fn hilbert_matrix(n: usize) -> DMatrix<f64> {
    let kmax = (n - 1) / 2;
    let col: Vec<f64> = (0..n)
        .map(|m| {
            let phi = 2.0 * PI * m as f64 / n as f64;
            -(2.0 / n as f64) * (1..=kmax).map(|k| (k as f64 * phi).sin()).sum::<f64>()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n])
}

/// The unit disc with `m` boundary nodes `e^{2πij/m}`; normalization at `τ = −i`.
pub struct UnitDisc {
    m: usize,
    conj: DMatrix<f64>,
}

impl UnitDisc {
    pub fn new(m: usize) -> Self {
        assert!(m >= 8 && m % 4 == 0, "disc node count must be a multiple of 4");
        let mut conj = -hilbert_matrix(m);
        let a = 3 * m / 4;
        let row = conj.row(a).clone_owned();
        for i in 0..m {
            let mut r = conj.row_mut(i);
            r -= &row;
        }
        Self { m, conj }
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.m as f64
    }

    fn degree(&self) -> usize {
        self.m / 2
    }
}

impl HoloDomain for UnitDisc {
    fn len(&self) -> usize {
        self.m
    }
    fn node(&self, j: usize) -> C64 {
        C64::from_polar(1.0, self.angle(j))
    }
    fn period(&self) -> f64 {
        2.0 * PI
    }
    fn anchor(&self) -> usize {
        3 * self.m / 4
    }
    fn conjugate(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        &self.conj * u
    }

    /// Truncated power series `Σ_{k<m/2} c_k τ^k`, valid slightly outside the disc.
    fn extension(&self, points: &[C64]) -> DMatrix<C64> {
        let m = self.m;
        let kk = self.degree();
        DMatrix::from_fn(points.len(), m, |p, j| {
            let q = points[p] * C64::from_polar(1.0, -self.angle(j));
            let s = if (q - 1.0).norm() < 1e-9 {
                C64::new(kk as f64, 0.0)
            } else {
                (C64::new(1.0, 0.0) - q.powu(kk as u32)) / (C64::new(1.0, 0.0) - q)
            };
            s / m as f64
        })
    }

    fn extension_derivative(&self, points: &[C64]) -> DMatrix<C64> {
        let m = self.m;
        let kk = self.degree();
        DMatrix::from_fn(points.len(), m, |p, j| {
            let e = C64::from_polar(1.0, -self.angle(j));
            let tau = points[p];
            let mut acc = C64::default();
            let mut pw = C64::new(1.0, 0.0);
            for k in 1..kk {
                acc += pw * e.powu(k as u32) * k as f64;
                pw *= tau;
            }
            acc / m as f64
        })
    }

    fn contains(&self, p: C64) -> bool {
        p.norm() < 1.0
    }
}

/// Holomorphic functions on the interior of a smooth closed curve, via a second-kind
/// boundary integral equation for the harmonic conjugate and barycentric Cauchy evaluation.
pub struct CurveDomain {
    pub curve: Arc<dyn ClosedCurve>,
    nodes: Vec<C64>,
    d1: Vec<C64>,
    anchor: usize,
    lu: LU<f64, Dyn, Dyn>,
    rhs_op: DMatrix<f64>,
}

impl CurveDomain {
    /// `n` nodes uniformly spaced in the curve parameter; the anchor is parameter 0.
    pub fn new(curve: Arc<dyn ClosedCurve>, n: usize) -> Result<Self> {
        let l = curve.length();
        let ds = l / n as f64;
        let ev: Vec<(C64, C64, C64)> = (0..n).map(|j| curve.eval(j as f64 * ds)).collect();
        let nodes: Vec<C64> = ev.iter().map(|e| e.0).collect();
        let d1: Vec<C64> = ev.iter().map(|e| e.1).collect();
        let anchor = 0;
        let mut a = DMatrix::<f64>::identity(n, n);
        let mut smooth = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (re_k, im_k) = if i == j {
                    let d = ev[i].2 / (ev[i].1 * 2.0);
                    (d.re, d.im)
                } else {
                    let k = d1[j] / (nodes[j] - nodes[i]);
                    let cot = 1.0 / (PI * (j as f64 - i as f64) / n as f64).tan();
                    (k.re - PI / l * cot, k.im)
                };
                a[(i, j)] -= ds / PI * im_k;
                smooth[(i, j)] = ds / PI * re_k;
            }
            a[(i, anchor)] += 1.0;
        }
        let rhs_op = -(hilbert_matrix(n) + smooth);
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular("boundary integral operator".into()));
        }
        Ok(Self { curve, nodes, d1, anchor, lu, rhs_op })
    }

    fn weights_at(&self, tau: C64) -> (Vec<C64>, C64, Option<usize>) {
        let ds = self.curve.length() / self.nodes.len() as f64;
        let mut w = Vec::with_capacity(self.nodes.len());
        let mut sum = C64::default();
        for (j, (&z, &d)) in self.nodes.iter().zip(&self.d1).enumerate() {
            let diff = z - tau;
            if diff.norm() < 1e-13 {
                return (vec![], C64::default(), Some(j));
            }
            let v = d * ds / diff;
            sum += v;
            w.push(v);
        }
        (w, sum, None)
    }
}

impl HoloDomain for CurveDomain {
    fn len(&self) -> usize {
        self.nodes.len()
    }
    fn node(&self, j: usize) -> C64 {
        self.nodes[j]
    }
    fn period(&self) -> f64 {
        self.curve.length()
    }
    fn anchor(&self) -> usize {
        self.anchor
    }
    fn conjugate(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let rhs = &self.rhs_op * u;
        let mut v = self.lu.solve(&rhs).expect("factorization checked at construction");
        for c in 0..v.ncols() {
            let a = v[(self.anchor, c)];
            v.column_mut(c).add_scalar_mut(-a);
        }
        v
    }

    fn extension(&self, points: &[C64]) -> DMatrix<C64> {
        let n = self.nodes.len();
        let mut out = DMatrix::<C64>::zeros(points.len(), n);
        for (p, &tau) in points.iter().enumerate() {
            let (w, sum, hit) = self.weights_at(tau);
            if let Some(j) = hit {
                out[(p, j)] = C64::new(1.0, 0.0);
                continue;
            }
            for j in 0..n {
                out[(p, j)] = w[j] / sum;
            }
        }
        out
    }

    fn extension_derivative(&self, points: &[C64]) -> DMatrix<C64> {
        let n = self.nodes.len();
        let mut out = DMatrix::<C64>::zeros(points.len(), n);
        for (p, &tau) in points.iter().enumerate() {
            let (w, sum, hit) = self.weights_at(tau);
            if hit.is_some() {
                let e = 1e-6 * self.curve.length() / n as f64;
                let inward = C64::new(0.0, 1.0) * self.d1[hit.unwrap()];
                let a = self.extension(&[tau + inward * e, tau + inward * 2.0 * e]);
                for j in 0..n {
                    out[(p, j)] = (a[(0, j)] * 4.0 - a[(1, j)] - if j == hit.unwrap() { 3.0 } else { 0.0 })
                        / (inward * 2.0 * e);
                }
                continue;
            }
            let s2: C64 = w.iter().zip(&self.nodes).map(|(wj, z)| wj / (z - tau)).sum();
            for j in 0..n {
                let wj = w[j] / sum;
                out[(p, j)] = (w[j] / (self.nodes[j] - tau) - wj * s2) / sum;
            }
        }
        out
    }

    fn contains(&self, p: C64) -> bool {
        self.curve.contains(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::planar::{Circle, StadiumCurve};

    fn trace<D: HoloDomain>(d: &D, f: impl Fn(C64) -> C64) -> DMatrix<C64> {
        DMatrix::from_fn(d.len(), 1, |j, _| f(d.node(j)))
    }

    #[test]
    fn interpolation_weights_reproduce_trig_polynomials() {
        let n = 16;
        let l = 3.0;
        let f = |s: f64| (2.0 * PI * 3.0 * s / l).cos() + 0.5;
        for s in [0.0, 0.4, 1.1] {
            let w = periodic_interp_weights(n, l, s);
            let v: f64 = (0..n).map(|j| w[j] * f(l * j as f64 / n as f64)).sum();
            assert!((v - f(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_conjugate_of_cosine_vanishes_at_anchor() {
        let d = UnitDisc::new(64);
        let u = DMatrix::from_fn(64, 1, |j, _| d.angle(j).cos());
        let v = d.conjugate(&u);
        for j in 0..64 {
            assert!((v[(j, 0)] - (d.angle(j).sin() + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_extension_of_polynomial() {
        let d = UnitDisc::new(64);
        let g = trace(&d, |z| z * z * z - z * 2.0 + 0.5);
        let pts = [C64::new(0.3, -0.2), C64::new(0.0, 0.95), C64::new(1.02, 0.0)];
        let w = d.extension(&pts);
        let dw = d.extension_derivative(&pts);
        let v = &w * &g;
        let dv = &dw * &g;
        for (k, z) in pts.iter().enumerate() {
            assert!((v[(k, 0)] - (z * z * z - z * 2.0 + 0.5)).norm() < 1e-12);
            assert!((dv[(k, 0)] - (z * z * 3.0 - 2.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn curve_domain_on_circle_matches_disc() {
        let c = Arc::new(Circle { center: C64::new(0.2, -0.1), radius: 0.8, start: 0.3 });
        let d = CurveDomain::new(c, 96).unwrap();
        let f = |z: C64| (z * 1.3).exp() + z * z;
        let g = trace(&d, f);
        let re = g.map(|c| c.re);
        let v = d.conjugate(&re);
        let a = d.anchor();
        for j in 0..d.len() {
            assert!((v[(j, 0)] - (g[(j, 0)].im - g[(a, 0)].im)).abs() < 1e-11);
        }
        let p = [C64::new(0.25, 0.0), C64::new(0.2, 0.65)];
        let w = d.extension(&p) * &g;
        for (k, z) in p.iter().enumerate() {
            assert!((w[(k, 0)] - f(*z)).norm() < 1e-9, "{}", (w[(k, 0)] - f(*z)).norm());
        }
    }

    #[test]
    fn curve_domain_on_stadium() {
        let c = Arc::new(StadiumCurve::new(5.0));
        let n = 1200;
        let d = CurveDomain::new(c, n).unwrap();
        let f = |z: C64| (z * 0.7).sin() * (z * C64::new(0.0, 0.3)).exp() + z;
        let g = trace(&d, f);
        let re = g.map(|c| c.re);
        let v = d.conjugate(&re);
        let a = d.anchor();
        let err = (0..n).fold(0.0f64, |m, j| m.max((v[(j, 0)] - (g[(j, 0)].im - g[(a, 0)].im)).abs()));
        let scale = g.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        assert!(err < 1e-9 * scale, "conjugate error {err}");
        let p = [C64::new(0.5, 0.0), C64::new(0.0625, 1.5), C64::new(0.9, -5.3)];
        let w = d.extension(&p) * &g;
        for (k, z) in p.iter().enumerate() {
            assert!((w[(k, 0)] - f(*z)).norm() < 1e-9 * scale);
        }
    }
}
