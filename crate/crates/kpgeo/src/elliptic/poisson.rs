//! Families of Dirichlet problems `Δ_τ h = f`, `h = φ` on the boundary, one per torus point.

use std::sync::Arc;

use rayon::prelude::*;

use super::banded::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::fields::{GridField, Neighbor, PlanarDomainGrid, Support, TorusGrid};

/// Eight-point Lagrange weights in a periodic parameter sampled at `n` uniform nodes.
pub fn periodic_lagrange(n: usize, period: f64, s: f64) -> ([usize; 8], [f64; 8]) {
    let h = period / n as f64;
    let u = s.rem_euclid(period) / h;
    let i0 = u.floor() as i64 - 3;
    let mut idx = [0usize; 8];
    let mut w = [0.0; 8];
    for a in 0..8 {
        idx[a] = (i0 + a as i64).rem_euclid(n as i64) as usize;
        let mut p = 1.0;
        for b in 0..8 {
            if a != b {
                p *= (u - (i0 + b as i64) as f64) / (a as f64 - b as f64);
            }
        }
        w[a] = p;
    }
    (idx, w)
}

struct BoundaryTerm {
    row: usize,
    coef: f64,
    idx: [usize; 8],
    w: [f64; 8],
}

/// Shortley–Weller discretization of the Dirichlet Laplacian on a planar grid,
/// factored once and reused for every torus slice.
pub struct PoissonSolver {
    pub grid: Arc<PlanarDomainGrid>,
    lu: BandLu,
    terms: Vec<BoundaryTerm>,
}

impl PoissonSolver {
    pub fn new(grid: Arc<PlanarDomainGrid>) -> Result<Self> {
        let n = grid.n_interior();
        let mut band = 1;
        for (k, nb) in grid.neighbors.iter().enumerate() {
            for nbr in nb {
                if let Neighbor::Node(j) = nbr {
                    band = band.max(k.abs_diff(*j));
                }
            }
        }
        let mut a = BandMatrix::zeros(n, band, band);
        let mut terms = Vec::new();
        let h = grid.h;
        let nb_samples = grid.boundary_samples;
        let period = grid.curve.length();
        for (k, nb) in grid.neighbors.iter().enumerate() {
            let dist: Vec<f64> = nb
                .iter()
                .map(|n| match n {
                    Neighbor::Node(_) => h,
                    Neighbor::Boundary { frac, .. } => frac * h,
                })
                .collect();
            // pairs (east, west) and (north, south)
            let mut diag = 0.0;
            for (a_i, b_i) in [(0, 1), (2, 3)] {
                let (ha, hb) = (dist[a_i], dist[b_i]);
                for (dir, hh) in [(a_i, ha), (b_i, hb)] {
                    let c = 2.0 / (hh * (ha + hb));
                    diag += c;
                    match nb[dir] {
                        Neighbor::Node(j) => a.add(k, j, -c),
                        Neighbor::Boundary { s, .. } => {
                            let (idx, w) = periodic_lagrange(nb_samples, period, s);
                            terms.push(BoundaryTerm { row: k, coef: c, idx, w });
                        }
                    }
                }
            }
            a.add(k, k, diag);
        }
        Ok(Self { grid, lu: a.factor()?, terms })
    }

    /// Interior values of the solution of `Δh = f`, `h = g` on the boundary samples.
    pub fn solve_slice(&self, f: &[f64], g: &[f64]) -> Vec<f64> {
        let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        for t in &self.terms {
            let gv: f64 = (0..8).map(|a| t.w[a] * g[t.idx[a]]).sum();
            rhs[t.row] += t.coef * gv;
        }
        self.lu.solve(&rhs)
    }

    /// Discrete Laplacian of interior values `u` with boundary samples `g`.
    pub fn apply(&self, u: &[f64], g: &[f64]) -> Vec<f64> {
        let grid = &self.grid;
        let h = grid.h;
        let period = grid.curve.length();
        (0..grid.n_interior())
            .map(|k| {
                let nb = &grid.neighbors[k];
                let val = |n: &Neighbor| -> (f64, f64) {
                    match *n {
                        Neighbor::Node(j) => (u[j], h),
                        Neighbor::Boundary { frac, s } => {
                            let (idx, w) = periodic_lagrange(grid.boundary_samples, period, s);
                            ((0..8).map(|a| w[a] * g[idx[a]]).sum(), frac * h)
                        }
                    }
                };
                let mut lap = 0.0;
                for (ai, bi) in [(0, 1), (2, 3)] {
                    let (ua, ha) = val(&nb[ai]);
                    let (ub, hb) = val(&nb[bi]);
                    lap += 2.0 / (ha + hb) * ((ua - u[k]) / ha + (ub - u[k]) / hb);
                }
                lap
            })
            .collect()
    }
}

/// Solve the Dirichlet family slice by slice.
///
/// `rhs` lives on the planar support (its boundary samples are ignored) and `bc` on the
/// boundary curve; the result carries `bc` in its boundary samples.
pub fn poisson_family_solve(
    solver: &PoissonSolver,
    torus: TorusGrid,
    rhs: &GridField<f64>,
    bc: &GridField<f64>,
) -> Result<GridField<f64>> {
    let grid = &solver.grid;
    let (ni, nb, tl) = (grid.n_interior(), grid.boundary_samples, torus.len());
    if rhs.values.len() != grid.len() * tl || bc.values.len() != nb * tl {
        return Err(Error::Shape("Poisson data do not match the planar grid".into()));
    }
    let cols: Vec<Vec<f64>> = (0..tl)
        .into_par_iter()
        .map(|j| {
            let f: Vec<f64> = (0..ni).map(|k| rhs.values[k * tl + j]).collect();
            let g: Vec<f64> = (0..nb).map(|k| bc.values[k * tl + j]).collect();
            solver.solve_slice(&f, &g)
        })
        .collect();
    let mut values = vec![0.0; grid.len() * tl];
    for (j, col) in cols.iter().enumerate() {
        for k in 0..ni {
            values[k * tl + j] = col[k];
        }
    }
    values[ni * tl..].copy_from_slice(&bc.values);
    GridField::from_values(Support::Planar(grid.clone()), torus, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::C64;

    fn manufactured(grid: Arc<PlanarDomainGrid>) -> f64 {
        let torus = TorusGrid::new(4, 1);
        let solver = PoissonSolver::new(grid.clone()).unwrap();
        let exact = |p: C64, x: f64| (p.re * 1.3).sin() * (p.im * 0.7).cosh() * x.cos() + p.re * p.re * p.im;
        let lap = |p: C64, x: f64| {
            (p.re * 1.3).sin() * (p.im * 0.7).cosh() * (0.49 - 1.69) * x.cos() + 2.0 * p.im
        };
        let tl = torus.len();
        let mut f = vec![0.0; grid.len() * tl];
        let mut g = vec![0.0; grid.boundary_samples * tl];
        for k in 0..grid.len() {
            for j in 0..tl {
                let x = torus.point(j).0;
                f[k * tl + j] = lap(grid.position(k), x);
            }
        }
        for k in 0..grid.boundary_samples {
            for j in 0..tl {
                g[k * tl + j] = exact(grid.boundary_point(k), torus.point(j).0);
            }
        }
        let rhs = GridField::from_values(Support::Planar(grid.clone()), torus, f).unwrap();
        let bc = GridField::from_values(
            Support::Boundary { nodes: grid.boundary_samples, length: grid.curve.length() },
            torus,
            g,
        )
        .unwrap();
        let h = poisson_family_solve(&solver, torus, &rhs, &bc).unwrap();
        let mut err = 0.0f64;
        for k in 0..grid.n_interior() {
            for j in 0..tl {
                err = err.max((h.values[k * tl + j] - exact(grid.node_pos(k), torus.point(j).0)).abs());
            }
        }
        err
    }

    #[test]
    fn second_order_on_disc() {
        let e1 = manufactured(Arc::new(PlanarDomainGrid::disc(16, 256).unwrap()));
        let e2 = manufactured(Arc::new(PlanarDomainGrid::disc(32, 256).unwrap()));
        let order = (e1 / e2).log2();
        assert!(order > 1.7 && order < 2.4, "order {order} ({e1:e}, {e2:e})");
    }
}
