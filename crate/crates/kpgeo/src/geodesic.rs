//! End-to-end geodesic between two torus potentials: strip operator, schedule, iteration,
//! and the checks on the extracted path.

use serde::{Deserialize, Serialize};

use crate::disc_family::Background;
use crate::error::{Error, Result};
use crate::fields::{holder_norm, GridField, HolderIndex, Support, TorusGrid};
use crate::nash_moser::{choose_indices, derive_schedule, nash_moser_solve, IterationTrace, NMSchedule, NMVector, StripOperator};
use crate::oracle::{geodesic_residual, GeodesicPath};
use crate::smoothing::smooth;
use crate::strip_geodesic::geometry::BOUNDARY_SPACING;
use crate::strip_geodesic::ops::NeumannReport;
use crate::strip_geodesic::{centre_path, theta_independence, StripGeometry, StripProblem, StripTriple};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GeodesicConfig {
    pub theta: f64,
    pub window_cells: usize,
    pub boundary_spacing: f64,
    pub k: f64,
    pub j: f64,
    pub eps: f64,
    pub target: f64,
    pub max_steps: usize,
    /// Inflation applied to probed constants.
    pub inflation: f64,
}

impl Default for GeodesicConfig {
    fn default() -> Self {
        Self {
            theta: 6.0,
            window_cells: 16,
            boundary_spacing: BOUNDARY_SPACING,
            k: 5.0,
            j: 0.1,
            eps: 1.0,
            target: 1e-10,
            max_steps: 12,
            inflation: 1.5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbedConstants {
    /// `sup |D𝒫⁻¹ g| / sup |g|` at the starting point.
    pub c0_probe: f64,
    /// Largest smoothing ratio measured on the endpoint data.
    pub c_probe: f64,
    pub c0: f64,
    pub c: f64,
}

#[derive(Debug, Serialize)]
pub struct GeodesicRun {
    pub config: GeodesicConfig,
    pub constants: ProbedConstants,
    pub schedule: NMSchedule,
    pub trace: IterationTrace,
    pub neumann: Vec<NeumannReport>,
    #[serde(skip)]
    pub solution: StripTriple,
    /// `Φ` on the window at the solution.
    #[serde(skip)]
    pub phi: GridField<f64>,
    #[serde(skip)]
    pub path: GeodesicPath,
    /// `|𝒫(f) − h|₀` at the returned `f`.
    pub final_residual: f64,
    pub theta_variation: f64,
    pub geodesic_residual: f64,
    pub boundary_match: f64,
    pub h_norm_b: f64,
    pub f_norm_b_alpha: f64,
    /// `|f|_{B−α} / |h|_B`.
    pub norm_constant: f64,
}

/// `max_Q` of `|S_Q u|_b / |u|_0` and `Q^B |S_Q u − u|_0 / |u|_B` over `Q ∈ {2, …, 32}`.
fn smoothing_probe(u: &GridField<f64>, b: f64, big_b: f64) -> Result<f64> {
    let n0 = holder_norm(u, HolderIndex::new(0, 0.0))?.value;
    let nb = holder_norm(u, HolderIndex::from_real(big_b))?.value;
    if n0 == 0.0 {
        return Ok(1.0);
    }
    let mut worst = 0.0f64;
    for q in [2.0f64, 4.0, 8.0, 16.0, 32.0] {
        let s = smooth(u, q);
        worst = worst.max(holder_norm(&s, HolderIndex::from_real(b))?.value / (q.powf(b) * n0));
        worst = worst.max(q.powf(big_b) * s.sub(u).sup() / nb);
    }
    Ok(worst)
}

/// Solve for the geodesic from `phi0` to `phi1` over the background `bg`.
pub fn solve_geodesic(cfg: &GeodesicConfig, bg: Background, phi0: GridField<f64>, phi1: GridField<f64>) -> Result<GeodesicRun> {
    let torus = bg.torus;
    if phi0.torus != torus || phi1.torus != torus || !matches!(phi0.support, Support::Torus) || !matches!(phi1.support, Support::Torus) {
        return Err(Error::Shape("endpoints must be torus fields on the background grid".into()));
    }
    let idx = choose_indices(cfg.k, cfg.j)?;
    let geom = StripGeometry::with_spacing(cfg.theta, cfg.window_cells, cfg.boundary_spacing)?;
    let prob = StripProblem::new(&geom, bg);
    let h = StripTriple::endpoints(geom.window, phi0.clone(), phi1.clone());
    let f0 = StripTriple::zeros(geom.window, torus);
    let h_norm_b = h.norm(idx.big_b)?;

    let lin = prob.linearize(&f0)?;
    let g = h.sub(&lin.value());
    let (d, _) = lin.inverse(&g)?;
    let c0_probe = if g.sup() > 0.0 { d.sup() / g.sup() } else { 1.0 };
    let c_probe = smoothing_probe(&phi0, idx.b, idx.big_b)?.max(smoothing_probe(&phi1, idx.b, idx.big_b)?);
    let constants = ProbedConstants {
        c0_probe,
        c_probe,
        c0: cfg.inflation * c0_probe.max(1.0),
        c: cfg.inflation * c_probe.max(1.0),
    };
    let schedule = derive_schedule(&idx, constants.c0, constants.c, cfg.eps, h_norm_b, cfg.max_steps)?;

    let op = StripOperator::new(&prob);
    let (f, trace) = nash_moser_solve(&op, &h, f0, &schedule, cfg.target)?;
    let neumann = op.neumann.into_inner().expect("neumann log");
    let s = prob.solve(&f)?;
    let final_residual = prob.apply_from(&f, &s).sub(&h).sup();
    let path = GeodesicPath::new(centre_path(&s.phi)?)?;
    let geodesic_residual = geodesic_residual(&path, &prob.bg)?;
    let boundary_match = prob.boundary_match(&s, 16)?;
    let f_norm_b_alpha = f.norm(idx.b_minus_alpha())?;
    Ok(GeodesicRun {
        config: cfg.clone(),
        constants,
        schedule,
        trace,
        neumann,
        theta_variation: theta_independence(&s.phi),
        phi: s.phi,
        solution: f,
        path,
        final_residual,
        geodesic_residual,
        boundary_match,
        h_norm_b,
        f_norm_b_alpha,
        norm_constant: if h_norm_b > 0.0 { f_norm_b_alpha / h_norm_b } else { 0.0 },
    })
}

/// Geodesic from `phi0` to `phi1` near `psi0`: the background becomes `ω₀ + i∂∂̄ψ₀` and the
/// endpoints are taken relative to `psi0`. The returned path is relative as well; add
/// `psi0` to each slice for the absolute potentials.
pub fn solve_shifted(cfg: &GeodesicConfig, psi0: &GridField<f64>, phi0: &GridField<f64>, phi1: &GridField<f64>) -> Result<GeodesicRun> {
    if !matches!(psi0.support, Support::Torus) {
        return Err(Error::Shape("background must be a torus field".into()));
    }
    let bg = Background::new(psi0.torus, psi0.values.clone())?;
    solve_geodesic(cfg, bg, phi0.sub(psi0), phi1.sub(psi0))
}

/// `amplitude · cos x` on the torus.
pub fn cosine_profile(torus: TorusGrid, amplitude: f64) -> GridField<f64> {
    GridField::torus_field(torus, torus.sample(|x, _| amplitude * x.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_endpoints_give_the_constant_path() {
        let torus = TorusGrid::new(8, 1);
        let cfg = GeodesicConfig { theta: 5.0, window_cells: 6, boundary_spacing: 0.04, ..Default::default() };
        let z = GridField::zeros(Support::Torus, torus);
        let run = solve_geodesic(&cfg, Background::flat(torus), z.clone(), z).unwrap();
        assert_eq!(run.final_residual, 0.0);
        assert_eq!(run.path.psi.sup(), 0.0);
        assert_eq!(run.trace.steps.len(), 1);
    }

    #[test]
    fn shifted_background_with_equal_endpoints_is_constant() {
        let torus = TorusGrid::new(8, 1);
        let cfg = GeodesicConfig { theta: 5.0, window_cells: 6, boundary_spacing: 0.04, ..Default::default() };
        let psi0 = GridField::torus_field(torus, torus.sample(|x, _| 0.1 * (x + 0.2).sin()));
        let run = solve_shifted(&cfg, &psi0, &psi0, &psi0).unwrap();
        assert!(run.final_residual < 1e-9);
        assert!(run.path.psi.sup() < 1e-9);
    }

    #[test]
    fn small_cosine_geodesic_converges() {
        let torus = TorusGrid::new(16, 1);
        let cfg = GeodesicConfig { theta: 5.0, window_cells: 6, boundary_spacing: 0.04, ..Default::default() };
        let z = GridField::zeros(Support::Torus, torus);
        let run = solve_geodesic(&cfg, Background::flat(torus), z, cosine_profile(torus, 0.03)).unwrap();
        assert!(run.trace.converged, "{:?}", run.trace);
        assert!(run.final_residual < 1e-8);
        assert!(run.theta_variation < 1e-6, "{}", run.theta_variation);
    }
}
