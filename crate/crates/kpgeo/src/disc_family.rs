//! Holomorphic disc families attached to boundary data, and the foliation they span.
//!
//! For boundary data `F(σ, z)` on `∂U × T²` the unknowns are boundary traces of
//! `τ`-holomorphic `f, h` with `f(anchor, ·) = 0` and
//! `h − f̄/2 − ∂G(σ, z + f) + ∂ψ₀(z) = 0` on `∂U`, where `G = F + ψ₀` and the background
//! potential is `|z|²/2 + ψ₀`. Each step solves the constant-coefficient Riemann–Hilbert
//! problem with `A = ½ + ψ₀_{zz̄}`, `S = ψ₀_{zz}` for the correction.

use std::borrow::Cow;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::rh::rh_family_solve;
use crate::error::{Error, Result};
use crate::fields::spectral::{TorusSpectral, TrigInterp2};
use crate::fields::{holder_norm, GridField, HolderIndex, Support, TorusGrid, C64};
use crate::holo::HoloDomain;

/// Background potential `ρ₀ = |z|²/2 + ψ₀` on the torus.
#[derive(Clone, Debug)]
pub struct Background {
    pub torus: TorusGrid,
    pub psi0: Vec<f64>,
    /// `½ + ψ₀_{zz̄}` at the nodes.
    pub a: Vec<C64>,
    /// `ψ₀_{zz}` at the nodes.
    pub s: Vec<C64>,
    /// `∂_z ψ₀` at the nodes.
    pub dpsi: Vec<C64>,
    interp: TrigInterp2,
}

impl Background {
    pub fn flat(torus: TorusGrid) -> Self {
        Self::new(torus, vec![0.0; torus.len()]).expect("flat metric is positive")
    }

    pub fn new(torus: TorusGrid, psi0: Vec<f64>) -> Result<Self> {
        if psi0.len() != torus.len() {
            return Err(Error::Shape("background potential".into()));
        }
        let sp = TorusSpectral::new(torus);
        let lap = sp.dzdzbar(&psi0);
        let a: Vec<C64> = lap.iter().map(|&v| C64::new(0.5 + v, 0.0)).collect();
        if let Some((j, g)) = a.iter().enumerate().find(|(_, g)| g.re <= 0.0) {
            return Err(Error::LeftKahlerCone(format!("½ + ψ₀_zz̄ = {:e} at torus node {j}", g.re)));
        }
        let s = sp.dzdz(&psi0);
        let dpsi = sp.dz_real(&psi0);
        let interp = sp.interp_real(&psi0);
        Ok(Self { torus, psi0, a, s, dpsi, interp })
    }

    /// `ψ₀` at an arbitrary point.
    pub fn psi_at(&self, z: C64) -> f64 {
        self.interp.eval(z.re, z.im).re
    }

    /// `∂_z ψ₀` at an arbitrary point.
    pub fn dpsi_at(&self, z: C64) -> C64 {
        let (_, gx, gy) = self.interp.eval_grad(z.re, z.im);
        C64::new(gx.re, 0.0) * 0.5 - C64::new(0.0, 0.5) * gy.re
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationConfig {
    pub gamma: f64,
    pub x: f64,
    /// Radius of the low-norm ball, `|f|_{2+X} ≤ l`.
    pub l: f64,
    pub a_weight: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Record weighted norms of every correction (costs one Hölder evaluation per step).
    pub track_norms: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self { gamma: 4.5, x: 1.0 / 3.0, l: 0.2, a_weight: 1.0, tol: 1e-12, max_iter: 60, track_norms: false }
    }
}

/// Boundary traces of `(f, h)`: rows are boundary nodes, columns torus nodes.
#[derive(Clone, Debug)]
pub struct DiscFamilyState {
    pub f: DMatrix<C64>,
    pub h: DMatrix<C64>,
}

impl DiscFamilyState {
    pub fn zeros(nb: usize, tl: usize) -> Self {
        Self { f: DMatrix::zeros(nb, tl), h: DMatrix::zeros(nb, tl) }
    }

    pub fn sup(&self) -> f64 {
        self.f.iter().chain(self.h.iter()).fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn dist(&self, other: &Self) -> f64 {
        let d = |a: &DMatrix<C64>, b: &DMatrix<C64>| a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        d(&self.f, &other.f).max(d(&self.h, &other.h))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub iteration: usize,
    pub correction_sup: f64,
    pub weighted_norm: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct DiscSolution {
    pub state: DiscFamilyState,
    pub history: Vec<StepRecord>,
    pub residual: f64,
}

impl DiscSolution {
    /// Ratios of consecutive weighted correction norms while the corrections are above `floor`.
    pub fn contraction_ratios(&self, floor: f64) -> Vec<f64> {
        let w: Vec<f64> = self
            .history
            .iter()
            .filter(|r| r.correction_sup > floor)
            .filter_map(|r| r.weighted_norm)
            .collect();
        w.windows(2).map(|p| p[1] / p[0]).collect()
    }
}

/// One disc-family boundary problem.
pub struct DiscProblem<'a> {
    pub dom: &'a dyn HoloDomain,
    pub bg: &'a Background,
    /// `F` at the boundary nodes.
    pub data: DMatrix<f64>,
    g_interp: Vec<TrigInterp2>,
}

impl<'a> DiscProblem<'a> {
    pub fn new(dom: &'a dyn HoloDomain, bg: &'a Background, data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != dom.len() || data.ncols() != bg.torus.len() {
            return Err(Error::Shape(format!(
                "boundary data {}×{} for {} nodes × {} torus points",
                data.nrows(),
                data.ncols(),
                dom.len(),
                bg.torus.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite boundary data".into()));
        }
        let sp = TorusSpectral::new(bg.torus);
        let g_interp = (0..dom.len())
            .into_par_iter()
            .map(|j| {
                let g: Vec<f64> = (0..bg.torus.len()).map(|c| data[(j, c)] + bg.psi0[c]).collect();
                sp.interp_real(&g)
            })
            .collect();
        Ok(Self { dom, bg, data, g_interp })
    }

    pub fn torus(&self) -> TorusGrid {
        self.bg.torus
    }

    fn torus_point(&self, c: usize) -> C64 {
        let (x, y) = self.bg.torus.point(c);
        C64::new(x, y)
    }

    /// `G(σ_j, w)` and `∂_z G(σ_j, w)`.
    pub fn g_at(&self, j: usize, w: C64) -> (f64, C64) {
        let (v, gx, gy) = self.g_interp[j].eval_grad(w.re, w.im);
        (v.re, C64::new(0.5 * gx.re, -0.5 * gy.re))
    }

    /// Boundary residual `h − f̄/2 − ∂G(σ, z+f) + ∂ψ₀(z)`.
    pub fn residual(&self, st: &DiscFamilyState) -> DMatrix<C64> {
        let (nb, tl) = (self.dom.len(), self.bg.torus.len());
        let rows: Vec<Vec<C64>> = (0..nb)
            .into_par_iter()
            .map(|j| {
                (0..tl)
                    .map(|c| {
                        let f = st.f[(j, c)];
                        let (_, dg) = self.g_at(j, self.torus_point(c) + f);
                        st.h[(j, c)] - f.conj() * 0.5 - dg + self.bg.dpsi[c]
                    })
                    .collect()
            })
            .collect();
        DMatrix::from_fn(nb, tl, |j, c| rows[j][c])
    }

    /// One iteration: returns the new state and the correction `(𝔣, 𝔥)`.
    pub fn step(&self, st: &DiscFamilyState) -> Result<(DiscFamilyState, DiscFamilyState)> {
        let fmax = st.f.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if fmax > self.bg.torus.period / 4.0 {
            return Err(Error::PerturbationTooLarge(format!("|f|₀ = {fmax:e}")));
        }
        let b = self.residual(st);
        let (cf, ch) = rh_family_solve(self.dom, &self.bg.a, &self.bg.s, &b)?;
        let next = DiscFamilyState { f: &st.f + &cf, h: &st.h + &ch };
        Ok((next, DiscFamilyState { f: cf, h: ch }))
    }

    /// Weighted norm `|·|_{γ−2} + A|·|_{2+X}` of the pair, summed over `f` and `h`.
    pub fn weighted_norm(&self, st: &DiscFamilyState, cfg: &IterationConfig) -> Result<f64> {
        let lo = HolderIndex::from_real(cfg.gamma - 2.0);
        let hi = HolderIndex::from_real(2.0 + cfg.x);
        let mut total = 0.0;
        for m in [&st.f, &st.h] {
            let field = self.boundary_field(m)?;
            total += holder_norm(&field, lo)?.value + cfg.a_weight * holder_norm(&field, hi)?.value;
        }
        Ok(total)
    }

    /// Boundary traces as a field on `∂U × T²`.
    pub fn boundary_field(&self, m: &DMatrix<C64>) -> Result<GridField<C64>> {
        let (nb, tl) = (m.nrows(), m.ncols());
        let mut v = Vec::with_capacity(nb * tl);
        for j in 0..nb {
            for c in 0..tl {
                v.push(m[(j, c)]);
            }
        }
        GridField::from_values(Support::Boundary { nodes: nb, length: self.dom.period() }, self.bg.torus, v)
    }

    pub fn solve(&self, cfg: &IterationConfig) -> Result<DiscSolution> {
        self.solve_from(DiscFamilyState::zeros(self.dom.len(), self.bg.torus.len()), cfg)
    }

    pub fn solve_from(&self, init: DiscFamilyState, cfg: &IterationConfig) -> Result<DiscSolution> {
        let mut st = init;
        let mut history = Vec::new();
        let mut growth = 0;
        let mut factors = Vec::new();
        let mut last = f64::INFINITY;
        for it in 0..cfg.max_iter {
            let (next, corr) = self.step(&st)?;
            let cs = corr.sup();
            let wn = if cfg.track_norms { Some(self.weighted_norm(&corr, cfg)?) } else { None };
            history.push(StepRecord { iteration: it + 1, correction_sup: cs, weighted_norm: wn });
            st = next;
            if cs <= cfg.tol {
                let residual = self.residual(&st).iter().fold(0.0f64, |m, c| m.max(c.norm()));
                return Ok(DiscSolution { state: st, history, residual });
            }
            let ratio = cs / last;
            factors.push(ratio);
            if ratio >= 1.0 && cs > 1e3 * cfg.tol {
                growth += 1;
                if growth >= 3 {
                    return Err(Error::OutsideContraction(factors[factors.len() - 3..].to_vec()));
                }
            } else {
                growth = 0;
            }
            last = cs;
        }
        let residual = self.residual(&st).iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if residual < 1e2 * cfg.tol {
            return Ok(DiscSolution { state: st, history, residual });
        }
        Err(Error::NoConvergence(format!("disc family after {} steps, residual {residual:e}", cfg.max_iter)))
    }

    /// `G(σ, z + f) + |f|²/2` at the boundary nodes: the boundary values of the leafwise
    /// harmonic part of the potential.
    pub fn leaf_boundary_values(&self, st: &DiscFamilyState) -> DMatrix<f64> {
        let (nb, tl) = (self.dom.len(), self.bg.torus.len());
        let rows: Vec<Vec<f64>> = (0..nb)
            .into_par_iter()
            .map(|j| {
                (0..tl)
                    .map(|c| {
                        let f = st.f[(j, c)];
                        self.g_at(j, self.torus_point(c) + f).0 + 0.5 * f.norm_sqr()
                    })
                    .collect()
            })
            .collect();
        DMatrix::from_fn(nb, tl, |j, c| rows[j][c])
    }
}

/// Roll torus data by whole nodes (`dx`, `dy`).
pub fn roll_torus<T: Copy>(torus: TorusGrid, v: &[T], dx: isize, dy: isize) -> Vec<T> {
    (0..torus.len())
        .map(|j| {
            let (ix, iy) = ((j % torus.nx) as isize, (j / torus.nx) as isize);
            v[torus.index(ix - dx, iy - dy)]
        })
        .collect()
}

/// Solve the family on a copy of the chart shifted by whole torus nodes and compare `f`
/// after undoing the shift.
pub fn periodic_consistency(prob: &DiscProblem, sol: &DiscFamilyState, shift: (isize, isize), cfg: &IterationConfig) -> Result<f64> {
    let torus = prob.torus();
    let bg = Background::new(torus, roll_torus(torus, &prob.bg.psi0, shift.0, shift.1))?;
    let nb = prob.dom.len();
    let mut data = DMatrix::<f64>::zeros(nb, torus.len());
    for j in 0..nb {
        let row: Vec<f64> = (0..torus.len()).map(|c| prob.data[(j, c)]).collect();
        let r = roll_torus(torus, &row, shift.0, shift.1);
        for c in 0..torus.len() {
            data[(j, c)] = r[c];
        }
    }
    let shifted = DiscProblem::new(prob.dom, &bg, data)?.solve(cfg)?;
    let mut dev = 0.0f64;
    for j in 0..nb {
        let row: Vec<C64> = (0..torus.len()).map(|c| shifted.state.f[(j, c)]).collect();
        let back = roll_torus(torus, &row, -shift.0, -shift.1);
        for c in 0..torus.len() {
            dev = dev.max((back[c] - sol.f[(j, c)]).norm());
        }
    }
    Ok(dev)
}

/// The map `(τ, z) ↦ (τ, z + f(τ, z))` sampled at planar points, with its inverse on the
/// torus grid.
pub struct FoliationMap<'a> {
    pub torus: TorusGrid,
    pub points: Vec<C64>,
    pub ext: Cow<'a, DMatrix<C64>>,
    /// `f(τ_p, z_c)`.
    pub f_points: DMatrix<C64>,
    /// `z` with `z + f(τ_p, z) = z_c`.
    pub preimage: Vec<Vec<C64>>,
    pub jacobian_min: f64,
    /// `sup |z* + f(τ, z*) − w|` over the inverted nodes.
    pub inverse_defect: f64,
}

impl<'a> FoliationMap<'a> {
    pub fn build(
        dom: &dyn HoloDomain,
        torus: TorusGrid,
        st: &DiscFamilyState,
        points: Vec<C64>,
        ext: Option<&'a DMatrix<C64>>,
    ) -> Result<Self> {
        let ext = match ext {
            Some(e) => Cow::Borrowed(e),
            None => Cow::Owned(dom.extension(&points)),
        };
        let f_points = ext.as_ref() * &st.f;
        let sp = TorusSpectral::new(torus);
        let tl = torus.len();
        let per_point: Vec<Result<(Vec<C64>, f64, f64)>> = (0..points.len())
            .into_par_iter()
            .map(|p| {
                let row: Vec<C64> = (0..tl).map(|c| f_points[(p, c)]).collect();
                let it = sp.interp(&row);
                let mut pre = Vec::with_capacity(tl);
                let mut jmin = f64::INFINITY;
                let mut defect = 0.0f64;
                for c in 0..tl {
                    let (x, y) = torus.point(c);
                    let w = C64::new(x, y);
                    let (_, vx, vy) = it.eval_grad(x, y);
                    jmin = jmin.min((1.0 + vx.re) * (1.0 + vy.im) - vy.re * vx.im);
                    let z = invert_point(&it, w).ok_or_else(|| {
                        Error::FoliationNotInvertible(format!("Newton failed at point {p}, torus node {c}"))
                    })?;
                    defect = defect.max((z + it.eval(z.re, z.im) - w).norm());
                    pre.push(z);
                }
                Ok((pre, jmin, defect))
            })
            .collect();
        let mut preimage = Vec::with_capacity(points.len());
        let mut jacobian_min = f64::INFINITY;
        let mut inverse_defect = 0.0f64;
        for r in per_point {
            let (pre, j, d) = r?;
            preimage.push(pre);
            jacobian_min = jacobian_min.min(j);
            inverse_defect = inverse_defect.max(d);
        }
        if !(jacobian_min > 0.0) {
            return Err(Error::FoliationNotInvertible(format!("Jacobian minimum {jacobian_min:e}")));
        }
        Ok(Self { torus, points, ext, f_points, preimage, jacobian_min, inverse_defect })
    }

    /// Values known on the leaves, `u(τ_p, z_c + f(τ_p, z_c))`, resampled at `(τ_p, z_c)`.
    pub fn push_forward(&self, on_leaves: &DMatrix<f64>) -> DMatrix<f64> {
        let sp = TorusSpectral::new(self.torus);
        let tl = self.torus.len();
        let rows: Vec<Vec<f64>> = (0..self.points.len())
            .into_par_iter()
            .map(|p| {
                let row: Vec<f64> = (0..tl).map(|c| on_leaves[(p, c)]).collect();
                let it = sp.interp_real(&row);
                self.preimage[p].iter().map(|z| it.eval(z.re, z.im).re).collect()
            })
            .collect();
        DMatrix::from_fn(self.points.len(), tl, |p, c| rows[p][c])
    }

    /// The HCMA potential at the points: leafwise harmonic extension of
    /// `G + |f|²/2`, minus `|f|²/2 + ψ₀` along the leaf, pushed forward.
    pub fn potential(&self, prob: &DiscProblem, st: &DiscFamilyState) -> DMatrix<f64> {
        let u = prob.leaf_boundary_values(st);
        let harm = prob.dom.harmonic_extend(&self.ext, &u);
        let tl = self.torus.len();
        let leaves = DMatrix::from_fn(self.points.len(), tl, |p, c| {
            let (x, y) = self.torus.point(c);
            let f = self.f_points[(p, c)];
            harm[(p, c)] - 0.5 * f.norm_sqr() - prob.bg.psi_at(C64::new(x, y) + f)
        });
        self.push_forward(&leaves)
    }

    /// Leafwise harmonic extension of boundary data `g` (`n_b × torus`, values at `(σ, z_c)`).
    pub fn leafwise_harmonic(&self, dom: &dyn HoloDomain, st: &DiscFamilyState, g: &DMatrix<f64>) -> DMatrix<f64> {
        let sp = TorusSpectral::new(self.torus);
        let tl = self.torus.len();
        let nb = g.nrows();
        let rows: Vec<Vec<f64>> = (0..nb)
            .into_par_iter()
            .map(|j| {
                let row: Vec<f64> = (0..tl).map(|c| g[(j, c)]).collect();
                if row.iter().all(|&v| v == 0.0) {
                    return row;
                }
                let it = sp.interp_real(&row);
                (0..tl)
                    .map(|c| {
                        let (x, y) = self.torus.point(c);
                        let w = C64::new(x, y) + st.f[(j, c)];
                        it.eval(w.re, w.im).re
                    })
                    .collect()
            })
            .collect();
        let pulled = DMatrix::from_fn(nb, tl, |j, c| rows[j][c]);
        let harm = dom.harmonic_extend(&self.ext, &pulled);
        self.push_forward(&harm)
    }
}

/// Damped Newton for `z + f(z) = w` starting from `w`.
fn invert_point(it: &TrigInterp2, w: C64) -> Option<C64> {
    let mut z = w;
    let mut r = z + it.eval(z.re, z.im) - w;
    for _ in 0..50 {
        if r.norm() < 1e-14 {
            return Some(z);
        }
        let (_, vx, vy) = it.eval_grad(z.re, z.im);
        let (a, b, c, d) = (1.0 + vx.re, vy.re, vx.im, 1.0 + vy.im);
        let det = a * d - b * c;
        if det.abs() < 1e-14 {
            return None;
        }
        let dx = (d * r.re - b * r.im) / det;
        let dy = (-c * r.re + a * r.im) / det;
        let mut step = C64::new(dx, dy);
        let mut accepted = false;
        for _ in 0..30 {
            let zn = z - step;
            let rn = zn + it.eval(zn.re, zn.im) - w;
            if rn.norm() < r.norm() || rn.norm() < 1e-14 {
                z = zn;
                r = rn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return if r.norm() < 1e-12 { Some(z) } else { None };
        }
    }
    if r.norm() < 1e-12 {
        Some(z)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::UnitDisc;

    fn cos_data(dom: &UnitDisc, torus: TorusGrid, eps: f64) -> DMatrix<f64> {
        DMatrix::from_fn(dom.len(), torus.len(), |j, c| {
            let th = dom.angle(j);
            let (x, _) = torus.point(c);
            eps * th.cos() * x.cos()
        })
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let dom = UnitDisc::new(32);
        let torus = TorusGrid::new(8, 1);
        let bg = Background::flat(torus);
        let prob = DiscProblem::new(&dom, &bg, DMatrix::zeros(32, 8)).unwrap();
        let sol = prob.solve(&IterationConfig::default()).unwrap();
        assert_eq!(sol.history.len(), 1);
        assert_eq!(sol.state.sup(), 0.0);
    }

    #[test]
    fn small_data_converges_and_satisfies_boundary_condition() {
        let dom = UnitDisc::new(64);
        let torus = TorusGrid::new(16, 1);
        let bg = Background::flat(torus);
        let eps = 0.01;
        let prob = DiscProblem::new(&dom, &bg, cos_data(&dom, torus, eps)).unwrap();
        let (_, first) = prob.step(&DiscFamilyState::zeros(64, 16)).unwrap();
        assert!(first.f.iter().all(|c| c.norm() <= 2.0 * eps));
        let sol = prob.solve(&IterationConfig::default()).unwrap();
        assert!(sol.residual < 1e-11, "{}", sol.residual);
        let a = dom.anchor();
        assert!(sol.state.f.row(a).iter().all(|c| c.norm() < 1e-15));
        let d = periodic_consistency(&prob, &sol.state, (8, 0), &IterationConfig::default()).unwrap();
        assert!(d < 1e-12, "{d}");
        let d = periodic_consistency(&prob, &sol.state, (16, 0), &IterationConfig::default()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn foliation_of_zero_data_is_identity() {
        let dom = UnitDisc::new(16);
        let torus = TorusGrid::new(8, 2);
        let st = DiscFamilyState::zeros(16, torus.len());
        let pts = vec![C64::new(0.1, 0.2), C64::new(-0.5, 0.0)];
        let fol = FoliationMap::build(&dom, torus, &st, pts, None).unwrap();
        for (c, z) in fol.preimage[1].iter().enumerate() {
            let (x, y) = torus.point(c);
            assert_eq!(*z, C64::new(x, y));
        }
        assert_eq!(fol.jacobian_min, 1.0);
    }

    #[test]
    fn potential_matches_boundary_data_and_max_principle() {
        let dom = UnitDisc::new(64);
        let torus = TorusGrid::new(16, 1);
        let bg = Background::flat(torus);
        let data = cos_data(&dom, torus, 0.02);
        let prob = DiscProblem::new(&dom, &bg, data.clone()).unwrap();
        let sol = prob.solve(&IterationConfig::default()).unwrap();
        let pts: Vec<C64> = (0..8).map(|k| C64::from_polar(0.999999, k as f64 * 0.7)).chain([C64::new(0.2, 0.1)]).collect();
        let fol = FoliationMap::build(&dom, torus, &sol.state, pts.clone(), None).unwrap();
        assert!(fol.inverse_defect < 1e-12);
        let phi = fol.potential(&prob, &sol.state);
        for (p, z) in pts.iter().enumerate().take(8) {
            for c in 0..torus.len() {
                let want = 0.02 * z.arg().cos() * torus.point(c).0.cos();
                assert!((phi[(p, c)] - want).abs() < 1e-4, "{} vs {want}", phi[(p, c)]);
            }
        }
        assert!(phi.row(8).amax() <= 0.02 + 1e-10);
    }
}
