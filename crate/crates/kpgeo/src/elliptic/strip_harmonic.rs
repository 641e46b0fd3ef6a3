//! Harmonic functions on the long strip with data on the far caps.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::fields::{GridField, Support};
use crate::strip_geodesic::StripGeometry;

#[derive(Clone, Debug, Serialize)]
pub struct DecayCertificate {
    pub theta: f64,
    /// Barrier value on the window.
    pub delta: f64,
    pub measured_ratio: f64,
    pub holds: bool,
}

/// Barrier `w = 2 sin(π/4 + πt/2) cosh(πθ/2) / cosh(πΘ/2)`.
pub fn barrier(theta_big: f64, t: f64, theta: f64) -> f64 {
    2.0 * (PI / 4.0 + PI * t / 2.0).sin() * (PI * theta / 2.0).cosh() / (PI * theta_big / 2.0).cosh()
}

/// Supremum of the barrier over the window `|θ| ≤ 2`, with the sine factor bounded by one.
pub fn barrier_delta(theta_big: f64) -> f64 {
    2.0 * PI.cosh() / (PI * theta_big / 2.0).cosh()
}

/// Tolerance added to the barrier bound for the discretization.
pub const GRID_TOL: f64 = 1e-8;

/// `𝔥(F)`: harmonic `H` on `ℛ` with `H = 𝔰F` on `𝒞`, restricted to the window.
pub fn strip_harmonic(f: &GridField<f64>, geom: &StripGeometry) -> Result<(GridField<f64>, DecayCertificate)> {
    let tl = f.torus.len();
    let w = geom.window;
    let u = geom.s_extend(f)?;
    let zero = vec![0.0; w.n_theta * tl];
    let vals = geom.harmonic_to_window(&u, &zero, &zero);
    let h = GridField::from_values(Support::Window(w), f.torus, vals)?;
    let fsup = f.sup();
    let delta = barrier_delta(geom.theta);
    let measured_ratio = if fsup == 0.0 { 0.0 } else { h.sup() / fsup };
    let cert = DecayCertificate {
        theta: geom.theta,
        delta,
        measured_ratio,
        holds: h.sup() <= delta * fsup + GRID_TOL,
    };
    Ok((h, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::TorusGrid;

    #[test]
    fn barrier_value_at_six() {
        let d = barrier_delta(6.0);
        let e = std::f64::consts::E;
        let want = 2.0 * (e.powf(PI) + e.powf(-PI)) / (e.powf(3.0 * PI) + e.powf(-3.0 * PI));
        assert!((d - want).abs() < 1e-15);
        assert!((d - 3.74e-3).abs() < 5e-6);
        assert!((barrier(6.0, 0.5, 2.0) - d).abs() < 1e-15);
    }

    #[test]
    fn cap_data_decays_through_the_strip() {
        let geom = StripGeometry::with_spacing(5.0, 8, 0.025).unwrap();
        let torus = TorusGrid::new(4, 1);
        let w = geom.window;
        let mut v = Vec::new();
        for p in 0..w.len() {
            let (th, t) = w.node(p);
            let bump = if th.abs() > 1.0 { (PI * (th.abs() - 1.0)).sin().powi(2) } else { 0.0 };
            for j in 0..torus.len() {
                v.push((PI * t).sin() * bump * (j as f64 + 1.0).cos());
            }
        }
        let f = GridField::from_values(Support::Window(w), torus, v).unwrap();
        let (h, cert) = strip_harmonic(&f, &geom).unwrap();
        assert!(cert.holds, "{cert:?}");
        assert!(cert.measured_ratio > 0.0 && h.sup() < cert.delta);
        let zero = GridField::<f64>::zeros(Support::Window(w), torus);
        let (h0, c0) = strip_harmonic(&zero, &geom).unwrap();
        assert_eq!(h0.sup(), 0.0);
        assert!(c0.holds);
    }
}
