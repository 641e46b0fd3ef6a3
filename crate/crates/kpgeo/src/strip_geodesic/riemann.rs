//! Conformal map of a curve domain onto the unit disc.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fields::C64;
use crate::holo::HoloDomain;

/// `T(τ) = (τ − c) e^{G(τ)}` with `Re G = −log|ζ − c|` on the boundary, so `|T| = 1` there.
/// The anchor node is sent to `−i`, the centre `c` to `0`.
pub struct RiemannMap<'a> {
    dom: &'a dyn HoloDomain,
    centre: C64,
    /// Boundary values of `G`.
    g: DMatrix<C64>,
    pub cr_residual: f64,
}

impl<'a> RiemannMap<'a> {
    pub fn new(dom: &'a dyn HoloDomain, centre: C64, tol: f64) -> Result<Self> {
        if !dom.contains(centre) {
            return Err(Error::ConformalMap("centre outside the domain".into()));
        }
        let n = dom.len();
        let u = DMatrix::from_fn(n, 1, |j, _| -(dom.node(j) - centre).norm().ln());
        let mut g = dom.complete(&u);
        // Fix the imaginary constant so that T(anchor) = −i.
        let a = dom.anchor();
        let za = dom.node(a) - centre;
        let want = (-C64::i() / za).arg();
        let shift = want - g[(a, 0)].im;
        for v in g.iter_mut() {
            v.im += shift;
        }
        let mut map = Self { dom, centre, g, cr_residual: 0.0 };
        map.cr_residual = map.measure_cr();
        if !(map.cr_residual < tol) {
            return Err(Error::ConformalMap(format!("Cauchy–Riemann defect {:e} above {:e}", map.cr_residual, tol)));
        }
        Ok(map)
    }

    /// Boundary correspondence: `T` at the boundary nodes.
    pub fn boundary(&self) -> Vec<C64> {
        (0..self.dom.len()).map(|j| (self.dom.node(j) - self.centre) * self.g[(j, 0)].exp()).collect()
    }

    pub fn eval(&self, pts: &[C64]) -> Vec<C64> {
        let w = self.dom.extension(pts);
        let g = &w * &self.g;
        pts.iter().enumerate().map(|(p, &z)| (z - self.centre) * g[(p, 0)].exp()).collect()
    }

    /// `T` and `T'` at the points.
    pub fn eval_with_derivative(&self, pts: &[C64]) -> Vec<(C64, C64)> {
        let g = &self.dom.extension(pts) * &self.g;
        let dg = &self.dom.extension_derivative(pts) * &self.g;
        pts.iter()
            .enumerate()
            .map(|(p, &z)| {
                let e = g[(p, 0)].exp();
                ((z - self.centre) * e, e * (1.0 + (z - self.centre) * dg[(p, 0)]))
            })
            .collect()
    }

    /// `T⁻¹(w)` by Newton's method, continued along the ray from `0` with `1 − |w|`
    /// shrinking geometrically (the map crowds strongly towards the far ends).
    pub fn inverse(&self, w: C64) -> Result<C64> {
        let (rho, arg) = (w.norm(), w.arg());
        let steps = 24;
        let mut z = self.centre;
        for k in 1..=steps {
            let frac = k as f64 / steps as f64;
            let r = 1.0 - (1.0 - rho).powf(frac);
            let target = C64::from_polar(r, arg);
            z = self.newton(target, z)?;
        }
        Ok(z)
    }

    fn newton(&self, w: C64, mut z: C64) -> Result<C64> {
        for _ in 0..60 {
            let (t, dt) = self.eval_with_derivative(&[z])[0];
            let mut step = (t - w) / dt;
            while !self.dom.contains(z - step) && step.norm() > 1e-15 {
                step *= 0.5;
            }
            z -= step;
            if step.norm() < 1e-13 {
                return Ok(z);
            }
        }
        Err(Error::ConformalMap(format!("inverse Newton stalled at w = {w}")))
    }

    /// Largest `|∂_y T − i ∂_x T|` (centred differences) over an interior sample grid, relative to `|T'|`.
    fn measure_cr(&self) -> f64 {
        let mut pts = Vec::new();
        let r = 0.9;
        for k in 0..16 {
            for m in 1..6 {
                let a = 2.0 * PI * k as f64 / 16.0;
                let z = self.centre + C64::from_polar(r * m as f64 / 6.0 * self.inradius(), a);
                if self.dom.contains(z) {
                    pts.push(z);
                }
            }
        }
        let e = 1e-4;
        let mut worst = 0.0f64;
        for &z in &pts {
            let v = self.eval(&[z + e, z - e, z + C64::i() * e, z - C64::i() * e]);
            let dx = (v[0] - v[1]) / (2.0 * e);
            let dy = (v[2] - v[3]) / (2.0 * e);
            worst = worst.max((dy - C64::i() * dx).norm() / dx.norm().max(1e-300));
        }
        worst
    }

    fn inradius(&self) -> f64 {
        (0..self.dom.len()).map(|j| (self.dom.node(j) - self.centre).norm()).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::planar::{Circle, StadiumCurve};
    use crate::holo::CurveDomain;
    use std::sync::Arc;

    #[test]
    fn disc_recovers_mobius_map() {
        let c = Circle { center: C64::new(0.5, 0.0), radius: 0.5, start: PI };
        let dom = CurveDomain::new(Arc::new(c), 128).unwrap();
        let t = RiemannMap::new(&dom, C64::new(0.5, 0.0), 1e-6).unwrap();
        let pts = [C64::new(0.3, 0.1), C64::new(0.7, -0.2), C64::new(0.5, 0.4)];
        for (z, w) in pts.iter().zip(t.eval(&pts)) {
            assert!((w - C64::i() * 2.0 * (z - 0.5)).norm() < 1e-8);
        }
        assert!((t.boundary()[0] + C64::i()).norm() < 1e-15);
    }

    #[test]
    fn strip_map_normalized_and_invertible() {
        let dom = CurveDomain::new(Arc::new(StadiumCurve::new(5.0)), 1400).unwrap();
        let t = RiemannMap::new(&dom, C64::new(0.5, 0.0), 1e-5).unwrap();
        assert!((t.boundary()[0] + C64::i()).norm() < 1e-14);
        assert!(t.eval(&[C64::new(0.5, 0.0)])[0].norm() < 1e-15);
        let b = t.boundary();
        assert!(b.iter().all(|w| (w.norm() - 1.0).abs() < 1e-8));
        for z in [C64::new(0.3, 0.5), C64::new(0.8, -1.5), C64::new(0.5, 2.0)] {
            let w = t.eval(&[z])[0];
            assert!(w.norm() < 1.0);
            assert!((t.inverse(w).unwrap() - z).norm() < 1e-7);
        }
    }
}
