//! Assembly of the HCMA potential `Φ = P + Q` on the disc from a solved disc family, the
//! leafwise-harmonic operator, and the comparison of `Φ₁ − Φ₀` with `∫ H_λ dλ`.
//!
//! Conventions: `g = ½ + ψ₀_{zz̄} + Φ_{zz̄}`, the HCMA residual is
//! `Φ_{ττ̄}·g − |Φ_{τz̄}|²`, and `Δ = 4∂∂̄` in both variables.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::disc_family::{Background, DiscFamilyState, DiscProblem, FoliationMap, IterationConfig};
use crate::elliptic::PoissonSolver;
use crate::error::{Error, Result};
use crate::fields::spectral::TorusSpectral;
use crate::fields::{GridField, PlanarDomainGrid, Support, TorusGrid, C64};
use crate::holo::{HoloDomain, UnitDisc};

/// Largest admissible mean of the pulled-back 1-form.
pub const EXACTNESS_TOL: f64 = 1e-6;

/// Box lattice of a disc grid, extended one ring outside the disc, followed by the
/// boundary nodes of the holomorphic domain.
pub struct DiscLattice {
    pub grid: Arc<PlanarDomainGrid>,
    pub points: Vec<C64>,
    pub n_lattice: usize,
    box_point: Vec<Option<usize>>,
}

impl DiscLattice {
    /// `cells` intervals across the radius; the grid's boundary samples are the `m` disc
    /// nodes, rotated so that sample `j` is node `(j + 3m/4) mod m`.
    pub fn new(cells: usize, dom: &UnitDisc) -> Result<Self> {
        let grid = Arc::new(PlanarDomainGrid::disc(cells, dom.len())?);
        let reach = 1.0 + 1.5 * grid.h;
        let mut points = Vec::new();
        let mut box_point = vec![None; grid.box_nx * grid.box_ny];
        for iy in 0..grid.box_ny {
            for ix in 0..grid.box_nx {
                let p = grid.origin + C64::new(ix as f64 * grid.h, iy as f64 * grid.h);
                if p.norm() <= reach {
                    box_point[iy * grid.box_nx + ix] = Some(points.len());
                    points.push(p);
                }
            }
        }
        let n_lattice = points.len();
        points.extend((0..dom.len()).map(|j| dom.node(j)));
        Ok(Self { grid, points, n_lattice, box_point })
    }

    fn at(&self, ix: i64, iy: i64) -> Option<usize> {
        let g = &self.grid;
        if ix < 0 || iy < 0 || ix >= g.box_nx as i64 || iy >= g.box_ny as i64 {
            return None;
        }
        self.box_point[iy as usize * g.box_nx + ix as usize]
    }

    /// Lattice point of interior node `k` and of its eight neighbours
    /// (E, W, N, S, NE, NW, SE, SW).
    fn stencil(&self, k: usize) -> Result<(usize, [usize; 8])> {
        let (ix, iy) = self.grid.interior[k];
        let (ix, iy) = (ix as i64, iy as i64);
        let offs = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];
        let centre = self.at(ix, iy).ok_or_else(|| Error::Shape("interior node off the lattice".into()))?;
        let mut nb = [0; 8];
        for (a, (dx, dy)) in offs.iter().enumerate() {
            nb[a] = self
                .at(ix + dx, iy + dy)
                .ok_or_else(|| Error::Shape("stencil leaves the lattice".into()))?;
        }
        Ok((centre, nb))
    }

    /// Disc node sitting at grid boundary sample `j`.
    pub fn sample_node(&self, j: usize) -> usize {
        let m = self.grid.boundary_samples;
        (j + 3 * m / 4) % m
    }

    /// Interior nodes whose eight neighbours are interior nodes as well.
    fn deep_nodes(&self) -> Vec<usize> {
        let g = &self.grid;
        (0..g.n_interior())
            .filter(|&k| {
                let (ix, iy) = g.interior[k];
                [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)]
                    .iter()
                    .all(|(dx, dy)| {
                        let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                        jx >= 0 && jy >= 0 && g.node_at_box(jx as usize, jy as usize).is_some()
                    })
            })
            .collect()
    }
}

/// `P` and `ω = ∂_w P` on the lattice points.
pub struct RecoveredP {
    pub lattice: DiscLattice,
    pub fol: FoliationMap<'static>,
    pub p: DMatrix<f64>,
    pub omega: DMatrix<C64>,
    /// `sup_τ |mean_w ω(τ, w)|`.
    pub exactness_defect: f64,
}

/// Pull `∂ρ₀ + h` back along the leaves, subtract `∂ρ₀`, and integrate on each τ-slice
/// with `P(τ, 𝔷₀) = 0`, where `𝔷₀` is torus node 0.
pub fn recover_p(prob: &DiscProblem, st: &DiscFamilyState, lattice: DiscLattice) -> Result<RecoveredP> {
    let torus = prob.torus();
    let tl = torus.len();
    let fol = FoliationMap::build(prob.dom, torus, st, lattice.points.clone(), None)?;
    let h_points = fol.ext.as_ref() * &st.h;
    let sp = TorusSpectral::new(torus);
    let scale = 2.0 * std::f64::consts::PI / torus.period;
    let rows: Vec<(Vec<f64>, Vec<C64>, f64)> = (0..lattice.points.len())
        .into_par_iter()
        .map(|p| {
            let frow: Vec<C64> = (0..tl).map(|c| fol.f_points[(p, c)]).collect();
            let hrow: Vec<C64> = (0..tl).map(|c| h_points[(p, c)]).collect();
            let fi = sp.interp(&frow);
            let hi = sp.interp(&hrow);
            let omega: Vec<C64> = (0..tl)
                .map(|c| {
                    let z = fol.preimage[p][c];
                    let f = fi.eval(z.re, z.im);
                    hi.eval(z.re, z.im) - f.conj() * 0.5 + prob.bg.dpsi_at(z) - prob.bg.dpsi[c]
                })
                .collect();
            let mut coef = sp.coeffs(&omega);
            let defect = coef[0].norm() / tl as f64;
            for iy in 0..torus.ny {
                for ix in 0..torus.nx {
                    let k = iy * torus.nx + ix;
                    let nyq = crate::fields::spectral::is_nyquist(ix, torus.nx)
                        || crate::fields::spectral::is_nyquist(iy, torus.ny);
                    let kx = crate::fields::spectral::signed_freq(ix, torus.nx) as f64 * scale;
                    let ky = crate::fields::spectral::signed_freq(iy, torus.ny) as f64 * scale;
                    coef[k] = if k == 0 || nyq { C64::default() } else { coef[k] * 2.0 / C64::new(ky, kx) };
                }
            }
            let pv = sp.synth(&coef);
            let p0 = pv[0].re;
            (pv.iter().map(|v| v.re - p0).collect(), omega, defect)
        })
        .collect();
    let n = lattice.points.len();
    let p = DMatrix::from_fn(n, tl, |i, c| rows[i].0[c]);
    let omega = DMatrix::from_fn(n, tl, |i, c| rows[i].1[c]);
    let exactness_defect = rows.iter().fold(0.0f64, |m, r| m.max(r.2));
    if exactness_defect > EXACTNESS_TOL {
        return Err(Error::IntegrabilityViolated(exactness_defect));
    }
    Ok(RecoveredP { lattice, fol, p, omega, exactness_defect })
}

/// `Q` on the disc grid together with the z-variation of the right-hand side.
pub struct QField {
    /// Interior nodes, then boundary samples.
    pub q: Vec<f64>,
    /// `mean_z R` at the interior nodes.
    pub r_mean: Vec<f64>,
    pub q_consistency: f64,
    pub g_min: f64,
}

/// `∂_{w̄} ω` on every lattice row, giving `P_{zz̄}`.
fn p_zzbar(rp: &RecoveredP, torus: TorusGrid) -> DMatrix<f64> {
    let sp = TorusSpectral::new(torus);
    let tl = torus.len();
    let rows: Vec<Vec<f64>> = (0..rp.p.nrows())
        .into_par_iter()
        .map(|i| {
            let row: Vec<C64> = (0..tl).map(|c| rp.omega[(i, c)]).collect();
            sp.dzbar(&row).iter().map(|v| v.re).collect()
        })
        .collect();
    DMatrix::from_fn(rp.p.nrows(), tl, |i, c| rows[i][c])
}

/// Evaluate `R = −P_{ττ̄} + |P_{τz̄}|²/g`, average it over the torus and solve
/// `ΔQ = 4 mean R` with `Q = F(·, 𝔷₀)` on the circle.
pub fn compute_q(prob: &DiscProblem, rp: &RecoveredP) -> Result<QField> {
    let torus = prob.torus();
    let tl = torus.len();
    let lat = &rp.lattice;
    let grid = &lat.grid;
    let h = grid.h;
    let pzz = p_zzbar(rp, torus);
    let mut g_min = f64::INFINITY;
    for i in 0..lat.points.len() {
        for c in 0..tl {
            g_min = g_min.min(prob.bg.a[c].re + pzz[(i, c)]);
        }
    }
    if !(g_min > 0.0) {
        return Err(Error::MetricDegenerate(g_min));
    }
    let ni = grid.n_interior();
    let per_node: Vec<Result<(f64, f64)>> = (0..ni)
        .into_par_iter()
        .map(|k| {
            let (o, nb) = lat.stencil(k)?;
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for c in 0..tl {
                let lap = (rp.p[(nb[0], c)] + rp.p[(nb[1], c)] + rp.p[(nb[2], c)] + rp.p[(nb[3], c)] - 4.0 * rp.p[(o, c)]) / (h * h);
                let wx = (rp.omega[(nb[0], c)] - rp.omega[(nb[1], c)]).conj() / (2.0 * h);
                let wy = (rp.omega[(nb[2], c)] - rp.omega[(nb[3], c)]).conj() / (2.0 * h);
                let p_tzb = (wx - C64::i() * wy) * 0.5;
                let g = prob.bg.a[c].re + pzz[(o, c)];
                let r = -0.25 * lap + p_tzb.norm_sqr() / g;
                lo = lo.min(r);
                hi = hi.max(r);
                sum += r;
            }
            Ok((hi - lo, sum / tl as f64))
        })
        .collect();
    let mut q_consistency = 0.0f64;
    let mut r_mean = Vec::with_capacity(ni);
    for r in per_node {
        let (v, m) = r?;
        q_consistency = q_consistency.max(v);
        r_mean.push(m);
    }
    let bc: Vec<f64> = (0..grid.boundary_samples).map(|j| prob.data[(lat.sample_node(j), 0)]).collect();
    let rhs: Vec<f64> = r_mean.iter().map(|r| 4.0 * r).collect();
    let solver = PoissonSolver::new(grid.clone())?;
    let mut q = solver.solve_slice(&rhs, &bc);
    q.extend_from_slice(&bc);
    Ok(QField { q, r_mean, q_consistency, g_min })
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PotentialResiduals {
    pub hcma: f64,
    pub boundary: f64,
    pub q_consistency: f64,
    /// `sup |P + Q − Φ_leaf|` at the interior nodes.
    pub leaf_agreement: f64,
    pub exactness_defect: f64,
}

/// `P`, `Q` and `Φ = P + Q` on the disc grid.
pub struct PotentialBundle {
    pub p: GridField<f64>,
    pub q: GridField<f64>,
    pub phi: GridField<f64>,
    /// Torus index of the base point.
    pub basepoint: usize,
    pub residuals: PotentialResiduals,
}

/// Combine `P` and `Q` and evaluate the HCMA, boundary and positivity checks.
pub fn assemble_and_check(prob: &DiscProblem, st: &DiscFamilyState, rp: &RecoveredP, qf: &QField) -> Result<PotentialBundle> {
    let torus = prob.torus();
    let tl = torus.len();
    let lat = &rp.lattice;
    let grid = &lat.grid;
    let (ni, nb) = (grid.n_interior(), grid.boundary_samples);
    let h = grid.h;
    let mut p_vals = vec![0.0; grid.len() * tl];
    for k in 0..ni {
        let (o, _) = lat.stencil(k)?;
        for c in 0..tl {
            p_vals[k * tl + c] = rp.p[(o, c)];
        }
    }
    let mut boundary = 0.0f64;
    for j in 0..nb {
        let node = lat.sample_node(j);
        let row = lat.n_lattice + node;
        for c in 0..tl {
            let pv = rp.p[(row, c)];
            p_vals[(ni + j) * tl + c] = pv;
            boundary = boundary.max((pv + qf.q[ni + j] - prob.data[(node, c)]).abs());
        }
    }
    let phi_vals: Vec<f64> = (0..grid.len() * tl).map(|i| p_vals[i] + qf.q[i / tl]).collect();

    let leaf = rp.fol.potential(prob, st);
    let mut leaf_agreement = 0.0f64;
    for k in 0..ni {
        let (o, _) = lat.stencil(k)?;
        for c in 0..tl {
            leaf_agreement = leaf_agreement.max((phi_vals[k * tl + c] - leaf[(o, c)]).abs());
        }
    }

    // Positivity per slice on the assembled potential.
    let sp = TorusSpectral::new(torus);
    for k in 0..grid.len() {
        let lap = sp.dzdzbar(&phi_vals[k * tl..(k + 1) * tl]);
        for c in 0..tl {
            let g = prob.bg.a[c].re + lap[c];
            if g <= 0.0 {
                return Err(Error::LeftKahlerCone(format!("g = {g:e} at planar node {k}, torus node {c}")));
            }
        }
    }

    // HCMA residual with the rotated stencils, on nodes whose neighbours are interior.
    let pzz = p_zzbar(rp, torus);
    let mut hcma = 0.0f64;
    for k in lat.deep_nodes() {
        let (o, nbp) = lat.stencil(k)?;
        let (ix, iy) = grid.interior[k];
        let qn = |dx: i64, dy: i64| {
            let j = grid.node_at_box((ix as i64 + dx) as usize, (iy as i64 + dy) as usize).expect("deep node");
            qf.q[j]
        };
        let q_diag = (qn(1, 1) + qn(-1, 1) + qn(1, -1) + qn(-1, -1) - 4.0 * qf.q[k]) / (2.0 * h * h);
        for c in 0..tl {
            let p = |a: usize| rp.p[(nbp[a], c)];
            let p_diag = (p(4) + p(5) + p(6) + p(7) - 4.0 * rp.p[(o, c)]) / (2.0 * h * h);
            let phi_tt = 0.25 * (p_diag + q_diag);
            let w = |a: usize| rp.omega[(nbp[a], c)].conj();
            let du = w(4) - w(7);
            let dv = w(5) - w(6);
            let wx = (du - dv) / (4.0 * h);
            let wy = (du + dv) / (4.0 * h);
            let phi_tzb = (wx - C64::i() * wy) * 0.5;
            let g = prob.bg.a[c].re + pzz[(o, c)];
            hcma = hcma.max((phi_tt * g - phi_tzb.norm_sqr()).abs());
        }
    }

    let support = Support::Planar(grid.clone());
    let single = TorusGrid::new(1, 1);
    Ok(PotentialBundle {
        p: GridField::from_values(support.clone(), torus, p_vals)?,
        q: GridField::from_values(support.clone(), single, qf.q.clone())?,
        phi: GridField::from_values(support, torus, phi_vals)?,
        basepoint: 0,
        residuals: PotentialResiduals {
            hcma,
            boundary,
            q_consistency: qf.q_consistency,
            leaf_agreement,
            exactness_defect: rp.exactness_defect,
        },
    })
}

/// Solve the disc family for `data` and assemble the potential on a grid with `cells`
/// intervals across the radius.
pub fn disc_potential(dom: &UnitDisc, bg: &Background, data: DMatrix<f64>, cells: usize, cfg: &IterationConfig) -> Result<PotentialBundle> {
    let prob = DiscProblem::new(dom, bg, data)?;
    let sol = prob.solve(cfg)?;
    let rp = recover_p(&prob, &sol.state, DiscLattice::new(cells, dom)?)?;
    let qf = compute_q(&prob, &rp)?;
    assemble_and_check(&prob, &sol.state, &rp, &qf)
}

/// Leafwise-harmonic extension sampled at the foliation points.
pub struct TangentField {
    pub h: DMatrix<f64>,
    pub boundary_data: DMatrix<f64>,
    /// `sup |H| − sup |g|`; nonpositive up to rounding by the maximum principle.
    pub max_principle_excess: f64,
}

/// Pull `g` back along the leaves, extend harmonically in τ and push forward.
pub fn leafwise_harmonic(fol: &FoliationMap, dom: &dyn HoloDomain, st: &DiscFamilyState, g: &DMatrix<f64>) -> TangentField {
    let h = fol.leafwise_harmonic(dom, st, g);
    let excess = h.amax() - g.amax();
    TangentField { h, boundary_data: g.clone(), max_principle_excess: excess }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearizationReport {
    pub n_lambda: usize,
    /// `sup |Φ₁ − Φ₀|` at the sample points.
    pub difference: f64,
    /// `sup |Φ₁ − Φ₀ − T_n|` with the trapezoid rule on `n_lambda` and `n_lambda/2` panels.
    pub error_fine: f64,
    pub error_coarse: f64,
    /// `sup |T_n − T_{n/2}|`.
    pub richardson: f64,
    /// `|Z|₀/(λ−ν)²` at `ν = 0` for steps `2/n` and `1/n`.
    pub remainder_ratios: [f64; 2],
    pub solver_tol: f64,
}

impl LinearizationReport {
    /// Trapezoid error within the Richardson estimate plus the solver tolerance.
    pub fn integral_ok(&self) -> bool {
        self.error_fine <= 2.0 * self.richardson / 3.0 + self.solver_tol
    }

    pub fn remainder_ratio_agreement(&self) -> f64 {
        self.remainder_ratios[0] / self.remainder_ratios[1]
    }
}

/// Solve along `F_λ = (1−λ)F₀ + λF₁` at `n_lambda + 1` values of λ (`n_lambda` even),
/// evaluate `Φ_λ` and `H_λ = leafwise_harmonic(F₁ − F₀)` at `points`, and compare
/// `Φ₁ − Φ₀` with the trapezoid quadrature of `∫ H_λ dλ`.
pub fn linearized_comparison(
    dom: &UnitDisc,
    bg: &Background,
    f0: &DMatrix<f64>,
    f1: &DMatrix<f64>,
    n_lambda: usize,
    points: &[C64],
    cfg: &IterationConfig,
) -> Result<LinearizationReport> {
    if n_lambda < 2 || n_lambda % 2 == 1 {
        return Err(Error::Shape("n_lambda must be even and at least 2".into()));
    }
    let diff = f1 - f0;
    let ext = dom.extension(points);
    let samples: Vec<Result<(DMatrix<f64>, DMatrix<f64>)>> = (0..=n_lambda)
        .into_par_iter()
        .map(|i| {
            let lambda = i as f64 / n_lambda as f64;
            let run = || -> Result<(DMatrix<f64>, DMatrix<f64>)> {
                let data = f0 * (1.0 - lambda) + f1 * lambda;
                let prob = DiscProblem::new(dom, bg, data)?;
                let sol = prob.solve(cfg)?;
                let fol = FoliationMap::build(dom, bg.torus, &sol.state, points.to_vec(), Some(&ext))?;
                let phi = fol.potential(&prob, &sol.state);
                let h = leafwise_harmonic(&fol, dom, &sol.state, &diff).h;
                Ok((phi, h))
            };
            run().map_err(|e| Error::AtLambda { lambda, source: Box::new(e) })
        })
        .collect();
    let mut phis = Vec::new();
    let mut hs = Vec::new();
    for s in samples {
        let (p, h) = s?;
        phis.push(p);
        hs.push(h);
    }
    let trapezoid = |stride: usize| -> DMatrix<f64> {
        let n = n_lambda / stride;
        let dl = 1.0 / n as f64;
        let mut acc = (&hs[0] + &hs[n_lambda]) * (0.5 * dl);
        for i in 1..n {
            acc += &hs[i * stride] * dl;
        }
        acc
    };
    let delta = &phis[n_lambda] - &phis[0];
    let fine = trapezoid(1);
    let coarse = trapezoid(2);
    let dl = 1.0 / n_lambda as f64;
    let remainder = |i: usize| -> f64 {
        let step = i as f64 * dl;
        let z = &phis[i] - &phis[0] - &hs[0] * step;
        z.amax() / (step * step)
    };
    Ok(LinearizationReport {
        n_lambda,
        difference: delta.amax(),
        error_fine: (&delta - &fine).amax(),
        error_coarse: (&delta - &coarse).amax(),
        richardson: (&fine - &coarse).amax(),
        remainder_ratios: [remainder(2), remainder(1)],
        solver_tol: 10.0 * cfg.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(dom: &UnitDisc, torus: TorusGrid, eps: f64) -> DMatrix<f64> {
        DMatrix::from_fn(dom.len(), torus.len(), |j, c| {
            let th = dom.angle(j);
            let (x, _) = torus.point(c);
            eps * th.cos() * x.cos()
        })
    }

    #[test]
    fn zero_data_gives_zero_potential() {
        let dom = UnitDisc::new(32);
        let torus = TorusGrid::new(8, 1);
        let bg = Background::flat(torus);
        let b = disc_potential(&dom, &bg, DMatrix::zeros(32, 8), 8, &IterationConfig::default()).unwrap();
        assert_eq!(b.phi.sup(), 0.0);
        assert_eq!(b.residuals.q_consistency, 0.0);
        assert_eq!(b.residuals.hcma, 0.0);
    }

    #[test]
    fn assembled_potential_solves_hcma() {
        let dom = UnitDisc::new(64);
        let torus = TorusGrid::new(16, 1);
        let bg = Background::flat(torus);
        let b = disc_potential(&dom, &bg, data(&dom, torus, 0.02), 16, &IterationConfig::default()).unwrap();
        let r = b.residuals;
        assert!(r.exactness_defect < 1e-10, "{r:?}");
        assert!(r.boundary < 1e-10, "{r:?}");
        assert!(r.q_consistency < 1e-4, "{r:?}");
        assert!(r.hcma < 1e-4, "{r:?}");
        assert!(r.leaf_agreement < 1e-4, "{r:?}");
        assert!(b.phi.sup() <= 0.02 + 1e-6);
    }

    #[test]
    fn trapezoid_matches_difference() {
        let dom = UnitDisc::new(32);
        let torus = TorusGrid::new(8, 1);
        let bg = Background::flat(torus);
        let f1 = data(&dom, torus, 0.05);
        let pts = vec![C64::new(0.3, 0.1), C64::new(-0.5, 0.2), C64::new(0.0, 0.0)];
        let r = linearized_comparison(&dom, &bg, &DMatrix::zeros(32, 8), &f1, 8, &pts, &IterationConfig::default()).unwrap();
        assert!(r.integral_ok(), "{r:?}");
        assert!(r.error_fine < r.error_coarse);
    }
}
