//! The map `𝒫(𝛗, φ) = (𝛗, ℬ_𝛗(φ) − φ)` on the window and its tangential map.

use nalgebra::DMatrix;
use serde::Serialize;

use super::geometry::StripGeometry;
use crate::disc_family::{Background, DiscFamilyState, DiscProblem, FoliationMap, IterationConfig};
use crate::error::{Error, Result};
use crate::fields::{holder_norm, GridField, HolderIndex, IntervalGrid, Support, TorusGrid, WindowGrid, C64};
use crate::holo::HoloDomain;
use crate::smoothing::{smooth, smooth_vanishing};

/// `(φ₀, φ₁, φ)`: endpoint potentials on the torus and a window field vanishing at `t = 0, 1`.
#[derive(Clone, Debug)]
pub struct StripTriple {
    pub phi0: GridField<f64>,
    pub phi1: GridField<f64>,
    pub phi: GridField<f64>,
}

impl StripTriple {
    pub fn zeros(window: WindowGrid, torus: TorusGrid) -> Self {
        Self {
            phi0: GridField::zeros(Support::Torus, torus),
            phi1: GridField::zeros(Support::Torus, torus),
            phi: GridField::zeros(Support::Window(window), torus),
        }
    }

    pub fn endpoints(window: WindowGrid, phi0: GridField<f64>, phi1: GridField<f64>) -> Self {
        let phi = GridField::zeros(Support::Window(window), phi0.torus);
        Self { phi0, phi1, phi }
    }

    pub fn torus(&self) -> TorusGrid {
        self.phi0.torus
    }

    pub fn window(&self) -> WindowGrid {
        match self.phi.support {
            Support::Window(w) => w,
            _ => unreachable!("strip triples carry window fields"),
        }
    }

    fn zip(&self, o: &Self, op: impl Fn(&GridField<f64>, &GridField<f64>) -> GridField<f64>) -> Self {
        Self { phi0: op(&self.phi0, &o.phi0), phi1: op(&self.phi1, &o.phi1), phi: op(&self.phi, &o.phi) }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { phi0: self.phi0.scale(s), phi1: self.phi1.scale(s), phi: self.phi.scale(s) }
    }

    pub fn sup(&self) -> f64 {
        self.phi0.sup().max(self.phi1.sup()).max(self.phi.sup())
    }

    /// Largest of the three component norms.
    pub fn holder(&self, r: f64) -> Result<f64> {
        let idx = HolderIndex::from_real(r);
        let a = holder_norm(&self.phi0, idx)?.value;
        let b = holder_norm(&self.phi1, idx)?.value;
        let c = holder_norm(&self.phi, idx)?.value;
        Ok(a.max(b).max(c))
    }

    /// `S_N` on the endpoints and the boundary-preserving smoother on the window part.
    pub fn smooth(&self, n: f64) -> Result<Self> {
        Ok(Self { phi0: smooth(&self.phi0, n), phi1: smooth(&self.phi1, n), phi: smooth_vanishing(&self.phi, n)? })
    }
}

/// One strip solve: the disc family on `ℛ` and `Φ` on the window.
pub struct StripSolve {
    pub state: DiscFamilyState,
    pub iterations: usize,
    pub phi: GridField<f64>,
    pub boundary_data: DMatrix<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NeumannReport {
    pub terms: usize,
    pub factor: f64,
    pub last_increment: f64,
}

/// Neumann series stopping rule.
pub const NEUMANN_TOL: f64 = 1e-12;
pub const NEUMANN_MAX_TERMS: usize = 200;

/// `𝒫` for a fixed strip and background.
pub struct StripProblem<'g> {
    pub geom: &'g StripGeometry,
    pub bg: Background,
    pub cfg: IterationConfig,
}

impl<'g> StripProblem<'g> {
    pub fn new(geom: &'g StripGeometry, bg: Background) -> Self {
        Self { geom, bg, cfg: IterationConfig::default() }
    }

    pub fn torus(&self) -> TorusGrid {
        self.bg.torus
    }

    /// `M = φ_t + 𝔰φ` on the boundary nodes.
    pub fn boundary_data(&self, tr: &StripTriple) -> Result<DMatrix<f64>> {
        Ok(self.geom.interpolate_endpoints(&tr.phi0.values, &tr.phi1.values) + self.geom.s_extend(&tr.phi)?)
    }

    pub fn solve(&self, tr: &StripTriple) -> Result<StripSolve> {
        let m = self.boundary_data(tr)?;
        let prob = DiscProblem::new(self.geom.domain.as_ref(), &self.bg, m.clone())?;
        let sol = prob.solve(&self.cfg)?;
        let fol = self.foliation(&sol.state)?;
        let inner = fol.potential(&prob, &sol.state);
        let phi = self.assemble(&inner, &tr.phi0.values, &tr.phi1.values)?;
        Ok(StripSolve { state: sol.state, iterations: sol.history.len(), phi, boundary_data: m })
    }

    fn foliation(&self, st: &DiscFamilyState) -> Result<FoliationMap<'g>> {
        let pts: Vec<C64> = self.geom.interior_nodes().iter().map(|&p| self.geom.window.tau(p)).collect();
        FoliationMap::build(self.geom.domain.as_ref(), self.torus(), st, pts, Some(self.geom.interior_extension()))
    }

    /// Window field from interior-node rows and the two edge traces.
    fn assemble(&self, inner: &DMatrix<f64>, e0: &[f64], e1: &[f64]) -> Result<GridField<f64>> {
        let w = self.geom.window;
        let tl = self.torus().len();
        let mut out = vec![0.0; w.len() * tl];
        for (r, &p) in self.geom.interior_nodes().iter().enumerate() {
            for c in 0..tl {
                out[p * tl + c] = inner[(r, c)];
            }
        }
        for i in 0..w.n_theta {
            let (p0, p1) = (w.index(i, 0), w.index(i, w.n_t - 1));
            out[p0 * tl..(p0 + 1) * tl].copy_from_slice(e0);
            out[p1 * tl..(p1 + 1) * tl].copy_from_slice(e1);
        }
        GridField::from_values(Support::Window(w), self.torus(), out)
    }

    /// `φ_t` on the window.
    pub fn linear_part(&self, phi0: &[f64], phi1: &[f64]) -> GridField<f64> {
        let w = self.geom.window;
        let tl = self.torus().len();
        let mut v = Vec::with_capacity(w.len() * tl);
        for p in 0..w.len() {
            let t = w.node(p).1;
            for c in 0..tl {
                v.push((1.0 - t) * phi0[c] + t * phi1[c]);
            }
        }
        GridField::from_values(Support::Window(w), self.torus(), v).expect("finite endpoints")
    }

    /// `ℬ_𝛗(φ) = Φ|_𝔇 − φ_t` from a finished solve.
    pub fn b_from(&self, tr: &StripTriple, s: &StripSolve) -> GridField<f64> {
        let mut b = s.phi.sub(&self.linear_part(&tr.phi0.values, &tr.phi1.values));
        self.zero_edges(&mut b);
        b
    }

    fn zero_edges(&self, f: &mut GridField<f64>) {
        let w = self.geom.window;
        let tl = self.torus().len();
        for i in 0..w.n_theta {
            for k in [0, w.n_t - 1] {
                let p = w.index(i, k);
                f.values[p * tl..(p + 1) * tl].iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    pub fn apply(&self, tr: &StripTriple) -> Result<StripTriple> {
        let s = self.solve(tr)?;
        Ok(self.apply_from(tr, &s))
    }

    pub fn apply_from(&self, tr: &StripTriple, s: &StripSolve) -> StripTriple {
        let b = self.b_from(tr, s);
        StripTriple { phi0: tr.phi0.clone(), phi1: tr.phi1.clone(), phi: b.sub(&tr.phi) }
    }

    /// Solve at `tr` and prepare the tangential map there.
    pub fn linearize(&self, tr: &StripTriple) -> Result<Linearization<'_, 'g>> {
        let solve = self.solve(tr)?;
        let fol = self.foliation(&solve.state)?;
        Ok(Linearization { prob: self, base: tr.clone(), solve, fol })
    }

    /// `sup |Φ(σ − ηn) − M(σ)|` at every `stride`-th boundary node, `η` a small inward offset.
    pub fn boundary_match(&self, s: &StripSolve, stride: usize) -> Result<f64> {
        let dom = self.geom.domain.as_ref();
        let eta = 1e-7;
        let nodes: Vec<usize> = (0..dom.len()).step_by(stride.max(1)).collect();
        let pts: Vec<C64> = nodes
            .iter()
            .map(|&j| {
                let (_, d1, _) = self.geom.curve.eval(dom.param(j));
                dom.node(j) + C64::i() * d1 / d1.norm() * eta
            })
            .collect();
        let prob = DiscProblem::new(dom, &self.bg, s.boundary_data.clone())?;
        let fol = FoliationMap::build(dom, self.torus(), &s.state, pts, None)?;
        let phi = fol.potential(&prob, &s.state);
        let mut worst = 0.0f64;
        for (r, &j) in nodes.iter().enumerate() {
            for c in 0..self.torus().len() {
                worst = worst.max((phi[(r, c)] - s.boundary_data[(j, c)]).abs());
            }
        }
        Ok(worst)
    }
}

use crate::fields::planar::ClosedCurve;

/// `D𝒫` at a base triple, through the foliation of the base solution.
pub struct Linearization<'p, 'g> {
    pub prob: &'p StripProblem<'g>,
    pub base: StripTriple,
    pub solve: StripSolve,
    pub fol: FoliationMap<'g>,
}

impl<'p, 'g> Linearization<'p, 'g> {
    pub fn value(&self) -> StripTriple {
        self.prob.apply_from(&self.base, &self.solve)
    }

    /// `ℌ(g)` on the window, with edge traces `e0`, `e1`.
    pub fn harmonic(&self, g: &DMatrix<f64>, e0: &[f64], e1: &[f64]) -> Result<GridField<f64>> {
        let inner = self.fol.leafwise_harmonic(self.prob.geom.domain.as_ref(), &self.solve.state, g);
        self.prob.assemble(&inner, e0, e1)
    }

    /// `D₂ℬ v = ℌ(𝔰v)|_𝔇`.
    pub fn d2b(&self, v: &GridField<f64>) -> Result<GridField<f64>> {
        let g = self.prob.geom.s_extend(v)?;
        let zero = vec![0.0; self.prob.torus().len()];
        self.harmonic(&g, &zero, &zero)
    }

    /// `ℌ(u_t) − u_t` on the window.
    fn endpoint_response(&self, u0: &[f64], u1: &[f64]) -> Result<GridField<f64>> {
        let g = self.prob.geom.interpolate_endpoints(u0, u1);
        let h = self.harmonic(&g, u0, u1)?;
        let mut r = h.sub(&self.prob.linear_part(u0, u1));
        self.prob.zero_edges(&mut r);
        Ok(r)
    }

    /// `D𝒫(u₀, u₁, v) = (u₀, u₁, ℌ(u_t + 𝔰v)|_𝔇 − u_t − v)`.
    pub fn apply(&self, d: &StripTriple) -> Result<StripTriple> {
        let r = self.endpoint_response(&d.phi0.values, &d.phi1.values)?;
        let hv = self.d2b(&d.phi)?;
        Ok(StripTriple { phi0: d.phi0.clone(), phi1: d.phi1.clone(), phi: r.add(&hv).sub(&d.phi) })
    }

    /// Solve `D𝒫(d) = rhs`: the endpoints pass through and `(I − D₂ℬ)v = ℌ(u_t) − u_t − w`
    /// is summed as a Neumann series.
    pub fn inverse(&self, rhs: &StripTriple) -> Result<(StripTriple, NeumannReport)> {
        let r = self.endpoint_response(&rhs.phi0.values, &rhs.phi1.values)?;
        let b = r.sub(&rhs.phi);
        let (v, rep) = self.neumann(&b)?;
        Ok((StripTriple { phi0: rhs.phi0.clone(), phi1: rhs.phi1.clone(), phi: v }, rep))
    }

    pub fn neumann(&self, b: &GridField<f64>) -> Result<(GridField<f64>, NeumannReport)> {
        let mut v = b.clone();
        let mut term = b.clone();
        let mut factor = 0.0f64;
        let scale = b.sup().max(1e-300);
        for k in 1..=NEUMANN_MAX_TERMS {
            let ts = term.sup();
            if ts <= NEUMANN_TOL * scale.max(1.0) || ts == 0.0 {
                return Ok((v, NeumannReport { terms: k - 1, factor, last_increment: ts }));
            }
            let next = self.d2b(&term)?;
            factor = factor.max(next.sup() / ts);
            if factor >= 1.0 {
                return Err(Error::NoContraction(factor));
            }
            v = v.add(&next);
            term = next;
        }
        Err(Error::NeumannDiverged(NEUMANN_MAX_TERMS))
    }

    /// Power-iteration estimate of the `C⁰` factor `sup |D₂ℬ v| / sup |v|`.
    pub fn d2b_factor(&self, v0: &GridField<f64>, iterations: usize) -> Result<f64> {
        let mut v = v0.clone();
        let mut best = 0.0f64;
        for _ in 0..iterations {
            let s = v.sup();
            if s == 0.0 {
                break;
            }
            let next = self.d2b(&v)?;
            best = best.max(next.sup() / s);
            v = next.scale(1.0 / next.sup().max(1e-300));
        }
        Ok(best)
    }
}

/// `sup |∂_θ Φ|` over the window by fourth-order centred differences (nodes at least two
/// steps from the θ-edges).
pub fn theta_independence(phi: &GridField<f64>) -> f64 {
    let w = match phi.support {
        Support::Window(w) => w,
        _ => return 0.0,
    };
    let tl = phi.torus.len();
    let h = w.h_theta();
    let mut worst = 0.0f64;
    for i in 2..w.n_theta.saturating_sub(2) {
        for k in 0..w.n_t {
            let at = |di: isize| &phi.values[w.index((i as isize + di) as usize, k) * tl..][..tl];
            let (m2, m1, p1, p2) = (at(-2), at(-1), at(1), at(2));
            for c in 0..tl {
                let d = (m2[c] - 8.0 * m1[c] + 8.0 * p1[c] - p2[c]) / (12.0 * h);
                worst = worst.max(d.abs());
            }
        }
    }
    worst
}

/// The `θ = 0` column of a window field as a path on `[0,1] × T²`.
pub fn centre_path(phi: &GridField<f64>) -> Result<GridField<f64>> {
    let w = match phi.support {
        Support::Window(w) => w,
        _ => return Err(Error::Shape("window field expected".into())),
    };
    let tl = phi.torus.len();
    let i = w.centre_column();
    let mut v = Vec::with_capacity(w.n_t * tl);
    for k in 0..w.n_t {
        v.extend_from_slice(phi.slice(w.index(i, k)));
    }
    GridField::from_values(Support::Interval(IntervalGrid { n_t: w.n_t }), phi.torus, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup(torus: TorusGrid) -> (StripGeometry, Background) {
        (StripGeometry::with_spacing(5.0, 4, 0.04).unwrap(), Background::flat(torus))
    }

    #[test]
    fn zero_is_fixed() {
        let torus = TorusGrid::new(8, 1);
        let (geom, bg) = setup(torus);
        let p = StripProblem::new(&geom, bg);
        let z = StripTriple::zeros(geom.window, torus);
        assert_eq!(p.apply(&z).unwrap().sup(), 0.0);
    }

    #[test]
    fn t_only_fields_have_no_theta_variation() {
        let w = WindowGrid::with_cells(4);
        let torus = TorusGrid::new(2, 1);
        let v: Vec<f64> = (0..w.len()).flat_map(|p| { let t = w.node(p).1; [t * t, -t] }).collect();
        let f = GridField::from_values(Support::Window(w), torus, v).unwrap();
        assert!(theta_independence(&f) < 1e-13);
    }

    #[test]
    fn linearization_roundtrip_and_contraction() {
        let torus = TorusGrid::new(8, 1);
        let (geom, bg) = setup(torus);
        let p = StripProblem::new(&geom, bg);
        let base = StripTriple::endpoints(
            geom.window,
            GridField::zeros(Support::Torus, torus),
            GridField::torus_field(torus, torus.sample(|x, _| 0.03 * x.cos())),
        );
        let lin = p.linearize(&base).unwrap();
        let w = geom.window;
        let mut v = Vec::new();
        for q in 0..w.len() {
            let (th, t) = w.node(q);
            for c in 0..torus.len() {
                v.push((PI * t).sin() * (1.0 + th) * (c as f64).sin());
            }
        }
        let rhs = StripTriple {
            phi0: GridField::torus_field(torus, torus.sample(|x, _| 0.01 * (2.0 * x).sin())),
            phi1: GridField::torus_field(torus, torus.sample(|x, _| 0.02 * x.cos())),
            phi: GridField::from_values(Support::Window(w), torus, v).unwrap(),
        };
        let (d, rep) = lin.inverse(&rhs).unwrap();
        assert!(rep.factor < 0.05, "{rep:?}");
        let back = lin.apply(&d).unwrap();
        assert!(back.sub(&rhs).sup() < 1e-10, "{}", back.sub(&rhs).sup());
    }
}
