//! The long strip region, its window and the cap extension operator.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::interp::window_eval;
use crate::fields::planar::{ClosedCurve, StadiumCurve};
use crate::fields::{GridField, Support, WindowGrid, C64};
use crate::holo::{CurveDomain, HoloDomain};

/// Target boundary node spacing of the strip integral equation.
pub const BOUNDARY_SPACING: f64 = 0.017;

/// `ℛ` (stadium of half-length `Θ` with superellipse caps), the window `𝔇` and the
/// boundary discretization used for holomorphic functions on `ℛ`.
pub struct StripGeometry {
    pub theta: f64,
    pub curve: Arc<StadiumCurve>,
    /// Master cap region `ℛ̃`; the caps of `ℛ` are its translates by `±(Θ−1)`.
    pub master: Arc<StadiumCurve>,
    pub domain: Arc<CurveDomain>,
    pub window: WindowGrid,
    interior_ext: OnceLock<DMatrix<C64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryChecks {
    pub window_theta_extent: (f64, f64),
    pub cap_translate_deviation: f64,
    pub containment_violations: usize,
    pub side_deviation: f64,
}

impl StripGeometry {
    pub fn build(theta: f64, window_cells: usize) -> Result<Self> {
        Self::with_spacing(theta, window_cells, BOUNDARY_SPACING)
    }

    pub fn with_spacing(theta: f64, window_cells: usize, spacing: f64) -> Result<Self> {
        if !(theta > 4.0) {
            return Err(Error::ThetaTooSmall(theta));
        }
        let curve = Arc::new(StadiumCurve::new(theta));
        let master = Arc::new(StadiumCurve::new(1.0));
        let n = ((curve.length() / spacing / 4.0).ceil() as usize) * 4;
        let domain = Arc::new(CurveDomain::new(curve.clone(), n)?);
        Ok(Self {
            theta,
            curve,
            master,
            domain,
            window: WindowGrid::with_cells(window_cells),
            interior_ext: OnceLock::new(),
        })
    }

    pub fn n_boundary(&self) -> usize {
        self.domain.len()
    }

    /// Cap side (`±1`) of boundary node `j`, `None` on the straight sides.
    pub fn node_cap(&self, j: usize) -> Option<i32> {
        self.curve.cap_side(self.domain.param(j))
    }

    /// Window nodes as points of the strip.
    pub fn window_points(&self) -> Vec<C64> {
        (0..self.window.len()).map(|p| self.window.tau(p)).collect()
    }

    /// Window nodes with `0 < t < 1`, in window order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.window.len()).filter(|&p| p % self.window.n_t != 0 && p % self.window.n_t != self.window.n_t - 1).collect()
    }

    /// Cauchy extension weights from the boundary nodes to [`Self::interior_nodes`].
    pub fn interior_extension(&self) -> &DMatrix<C64> {
        self.interior_ext.get_or_init(|| {
            let pts: Vec<C64> = self.interior_nodes().iter().map(|&p| self.window.tau(p)).collect();
            self.domain.extension(&pts)
        })
    }

    /// Harmonic extension of boundary data (`n_b × torus`) to the window; the rows on
    /// `t = 0, 1` are taken from `edge0`, `edge1` (window order in `θ`, torus fastest).
    pub fn harmonic_to_window(&self, u: &DMatrix<f64>, edge0: &[f64], edge1: &[f64]) -> Vec<f64> {
        let tl = u.ncols();
        let w = self.window;
        let inner = self.domain.harmonic_extend(self.interior_extension(), u);
        let mut out = vec![0.0; w.len() * tl];
        for (r, &p) in self.interior_nodes().iter().enumerate() {
            for c in 0..tl {
                out[p * tl + c] = inner[(r, c)];
            }
        }
        for i in 0..w.n_theta {
            let (p0, p1) = (w.index(i, 0), w.index(i, w.n_t - 1));
            out[p0 * tl..(p0 + 1) * tl].copy_from_slice(&edge0[i * tl..(i + 1) * tl]);
            out[p1 * tl..(p1 + 1) * tl].copy_from_slice(&edge1[i * tl..(i + 1) * tl]);
        }
        out
    }

    /// `φ_t = (1−t)φ₀ + tφ₁` on the boundary nodes (`n_b × torus` matrix).
    pub fn interpolate_endpoints(&self, phi0: &[f64], phi1: &[f64]) -> DMatrix<f64> {
        let tl = phi0.len();
        DMatrix::from_fn(self.n_boundary(), tl, |j, c| {
            let t = self.domain.node(j).re.clamp(0.0, 1.0);
            (1.0 - t) * phi0[c] + t * phi1[c]
        })
    }

    /// `𝔰φ`: zero on the straight sides, the window field translated by `∓(Θ−1)` on the caps.
    pub fn s_extend(&self, phi: &GridField<f64>) -> Result<DMatrix<f64>> {
        match phi.support {
            Support::Window(w) if w == self.window => {}
            _ => return Err(Error::Shape("window field on this strip expected".into())),
        }
        let tl = phi.torus.len();
        let mut out = DMatrix::<f64>::zeros(self.n_boundary(), tl);
        for j in 0..self.n_boundary() {
            if let Some(side) = self.node_cap(j) {
                let z = self.domain.node(j);
                let th = z.im - side as f64 * (self.theta - 1.0);
                let v = window_eval(&self.window, &phi.values, tl, th, z.re.clamp(0.0, 1.0));
                for c in 0..tl {
                    out[(j, c)] = v[c];
                }
            }
        }
        Ok(out)
    }

    /// Structural checks of the construction.
    pub fn checks(&self) -> GeometryChecks {
        let shift = C64::new(0.0, self.theta - 1.0);
        let mut dev = 0.0f64;
        let ml = self.master.length();
        let samples = 1000;
        let mut violations = 0;
        for k in 0..samples {
            let s = ml * k as f64 / samples as f64;
            let p = self.master.point(s);
            let up = p + shift;
            let down = p - shift;
            dev = dev.max(((up - shift) - (down + shift)).norm());
            if !(p.re >= -1e-12 && p.re <= 1.0 + 1e-12 && p.im.abs() < 1.75) {
                violations += 1;
            }
            let q = C64::new((k as f64 + 0.5) / samples as f64, 2.0 * ((k * 7919) % samples) as f64 / samples as f64 - 1.0);
            let q = C64::new(q.re, q.im * 0.999);
            if !self.master.contains(q) {
                violations += 1;
            }
        }
        // Cap nodes of ℛ lie on the translated master curve.
        for j in 0..self.n_boundary() {
            if let Some(side) = self.node_cap(j) {
                let p = self.domain.node(j) - shift * side as f64;
                let q = self.master.point(self.master.param_of(p));
                dev = dev.max((p - q).norm());
            }
        }
        let mut side_dev = 0.0f64;
        for j in 0..self.n_boundary() {
            let z = self.domain.node(j);
            if self.node_cap(j).is_none() {
                side_dev = side_dev.max(z.re.min((1.0 - z.re).abs()).abs());
            }
        }
        GeometryChecks {
            window_theta_extent: (self.window.theta(0), self.window.theta(self.window.n_theta - 1)),
            cap_translate_deviation: dev,
            containment_violations: violations,
            side_deviation: side_dev,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::TorusGrid;

    #[test]
    fn rejects_short_strips() {
        assert!(matches!(StripGeometry::with_spacing(4.0, 4, 0.1), Err(Error::ThetaTooSmall(_))));
    }

    #[test]
    fn construction_checks() {
        let g = StripGeometry::with_spacing(6.0, 8, 0.05).unwrap();
        let c = g.checks();
        assert_eq!(c.window_theta_extent, (-2.0, 2.0));
        assert!(c.cap_translate_deviation < 1e-12, "{}", c.cap_translate_deviation);
        assert_eq!(c.containment_violations, 0);
        assert!(c.side_deviation < 1e-14);
    }

    #[test]
    fn extension_places_shifted_copies_on_caps() {
        let g = StripGeometry::with_spacing(5.0, 8, 0.05).unwrap();
        let torus = TorusGrid::new(4, 1);
        let w = g.window;
        let mut v = Vec::new();
        for p in 0..w.len() {
            let (th, t) = w.node(p);
            for j in 0..torus.len() {
                v.push(t * (1.0 - t) * th * (1.0 + j as f64));
            }
        }
        let phi = GridField::from_values(Support::Window(w), torus, v).unwrap();
        let s = g.s_extend(&phi).unwrap();
        let mut sup = 0.0f64;
        for j in 0..g.n_boundary() {
            let z = g.domain.node(j);
            match g.node_cap(j) {
                None => assert_eq!(s.row(j).amax(), 0.0),
                Some(side) => {
                    let th = z.im - side as f64 * 4.0;
                    // The field is cubic in (θ,t) so bicubic interpolation is exact.
                    let want = z.re * (1.0 - z.re) * th * 2.0;
                    assert!((s[(j, 1)] - want).abs() < 1e-12);
                    sup = sup.max(s.row(j).amax());
                }
            }
        }
        assert!(sup <= phi.sup() + 1e-12);
        let zero = GridField::<f64>::zeros(Support::Window(w), torus);
        assert_eq!(g.s_extend(&zero).unwrap().amax(), 0.0);
    }
}
