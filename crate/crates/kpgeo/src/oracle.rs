//! Ground truth for geodesics of torus potentials that depend on `x` only.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::disc_family::Background;
use crate::error::{Error, Result};
use crate::fields::spectral::{forward_nd, signed_freq};
use crate::fields::{holder_norm, GridField, HolderIndex, IntervalGrid, Support, TorusGrid, TorusSpectral, C64};

/// A path `Ψ(t, ·)` sampled on a uniform grid of `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub grid: IntervalGrid,
    pub psi: GridField<f64>,
}

impl GeodesicPath {
    pub fn new(psi: GridField<f64>) -> Result<Self> {
        match psi.support {
            Support::Interval(grid) => Ok(Self { grid, psi }),
            _ => Err(Error::Shape("path fields live on an interval".into())),
        }
    }

    pub fn torus(&self) -> TorusGrid {
        self.psi.torus
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        self.psi.slice(k)
    }
}

/// Second and first derivative weights at node `k` of a uniform grid with `n` nodes
/// (fourth order, one-sided next to the ends).
fn fd4(k: usize, n: usize) -> (usize, [f64; 6], [f64; 6]) {
    if k >= 2 && k + 2 < n {
        (k - 2, [-1.0, 16.0, -30.0, 16.0, -1.0, 0.0], [1.0, -8.0, 0.0, 8.0, -1.0, 0.0])
    } else if k == 1 {
        (0, [10.0, -15.0, -4.0, 14.0, -6.0, 1.0], [-3.0, -10.0, 18.0, -6.0, 1.0, 0.0])
    } else {
        // k == n − 2: mirror of the k == 1 stencil
        (n - 6, [1.0, -6.0, 14.0, -4.0, -15.0, 10.0], [0.0, -1.0, 6.0, -18.0, 10.0, 3.0])
    }
}

/// `sup |Ψ_tt − |Ψ_tz|² / g|` over interior nodes, `g = ½ + ψ₀_zz̄ + Ψ_zz̄`.
pub fn geodesic_residual(path: &GeodesicPath, bg: &Background) -> Result<f64> {
    let n = path.grid.n_t;
    if n < 6 {
        return Err(Error::InsufficientResolution("geodesic residual needs 6 time nodes".into()));
    }
    let torus = path.torus();
    let sp = TorusSpectral::new(torus);
    let h = path.grid.h();
    let tl = torus.len();
    let mut worst = 0.0f64;
    for k in 1..n - 1 {
        let (s, w2, w1) = fd4(k, n);
        let mut tt = vec![0.0; tl];
        let mut t1 = vec![0.0; tl];
        for (a, (&c2, &c1)) in w2.iter().zip(&w1).enumerate() {
            if c2 == 0.0 && c1 == 0.0 {
                continue;
            }
            let sl = path.slice(s + a);
            for c in 0..tl {
                tt[c] += c2 * sl[c] / (12.0 * h * h);
                t1[c] += c1 * sl[c] / (12.0 * h);
            }
        }
        let tz = sp.dz_real(&t1);
        let lap = sp.dzdzbar(path.slice(k));
        for c in 0..tl {
            let g = bg.a[c].re + lap[c];
            if g <= 0.0 {
                return Err(Error::LeftKahlerCone(format!("g = {g:e} at t-node {k}, torus node {c}")));
            }
            worst = worst.max((tt[c] - tz[c].norm_sqr() / g).abs());
        }
    }
    Ok(worst)
}

/// Fourier series of a real `2π`-periodic function from uniform samples.
struct Fourier1 {
    modes: Vec<(f64, C64)>,
}

impl Fourier1 {
    fn new(v: &[f64]) -> Self {
        let n = v.len();
        let mut c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        forward_nd(&mut c, &[n]);
        let mut modes = Vec::new();
        for (k, &ck) in c.iter().enumerate() {
            let f = signed_freq(k, n);
            if n % 2 == 0 && k == n / 2 {
                // split the Nyquist mode symmetrically
                modes.push((f as f64, ck * 0.5));
                modes.push((-(f as f64), ck * 0.5));
            } else {
                modes.push((f as f64, ck));
            }
        }
        Self { modes }
    }

    /// Derivative of order `d` at `x`.
    fn eval(&self, x: f64, d: u32) -> f64 {
        let mut acc = 0.0;
        for &(k, c) in &self.modes {
            acc += (c * C64::new(0.0, k).powu(d) * C64::from_polar(1.0, k * x)).re;
        }
        acc
    }
}

fn newton_1d(mut x: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<f64> {
    for _ in 0..100 {
        let (v, d) = f(x);
        let step = v / d;
        x -= step;
        if step.abs() < 1e-15 * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    let (v, _) = f(x);
    if v.abs() < 1e-13 {
        Ok(x)
    } else {
        Err(Error::NoConvergence(format!("Legendre inversion residual {v:e}")))
    }
}

fn check_convexity(v: &Fourier1, nx: usize) -> Result<()> {
    for j in 0..4 * nx {
        let x = 2.0 * PI * j as f64 / (4 * nx) as f64;
        if 1.0 + v.eval(x, 2) <= 0.0 {
            return Err(Error::LeftKahlerCone(format!("1 + v_xx ≤ 0 at x = {x}")));
        }
    }
    Ok(())
}

/// Method (a): `u = x²/2 + v` has Legendre transform linear in `t`.
/// Inputs and output are `v = Ψ/2` samples on `nx` uniform nodes.
pub fn legendre_path(v0: &[f64], v1: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let nx = v0.len();
    let (f0, f1) = (Fourier1::new(v0), Fourier1::new(v1));
    check_convexity(&f0, nx)?;
    check_convexity(&f1, nx)?;
    let xp = |f: &Fourier1, p: f64| newton_1d(p, |x| (x + f.eval(x, 1) - p, 1.0 + f.eval(x, 2)));
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let mut row = Vec::with_capacity(nx);
        for j in 0..nx {
            let x = 2.0 * PI * j as f64 / nx as f64;
            let g = |p: f64| -> (f64, f64) {
                let a = xp(&f0, p).unwrap_or(f64::NAN);
                let b = xp(&f1, p).unwrap_or(f64::NAN);
                let val = (1.0 - t) * a + t * b - x;
                let der = (1.0 - t) / (1.0 + f0.eval(a, 2)) + t / (1.0 + f1.eval(b, 2));
                (val, der)
            };
            let p = newton_1d(x, g)?;
            let (a, b) = (xp(&f0, p)?, xp(&f1, p)?);
            let u0 = a * a / 2.0 + f0.eval(a, 0);
            let u1 = b * b / 2.0 + f1.eval(b, 0);
            let dual = (1.0 - t) * (a * p - u0) + t * (b * p - u1);
            row.push(x * p - dual - x * x / 2.0);
        }
        out.push(row);
    }
    Ok(out)
}

/// Chebyshev–Gauss–Lobatto nodes on `[0,1]` (increasing) and the differentiation matrix.
fn chebyshev(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let xs: Vec<f64> = (0..=n).map(|k| (k as f64 * PI / n as f64).cos()).collect();
    let c = |k: usize| if k == 0 || k == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = c(i) / c(j) * s / (xs[i] - xs[j]);
            }
        }
        let row: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -row;
    }
    // map x ∈ [−1,1] to t = (1 − x)/2 so t increases with the index
    let t: Vec<f64> = xs.iter().map(|x| (1.0 - x) / 2.0).collect();
    (t, d * -2.0)
}

/// Fourier differentiation matrix of order `d` on `n` uniform nodes of `[0, 2π)`.
fn fourier_matrix(n: usize, d: u32) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = vec![C64::default(); n];
        e[j] = C64::new(1.0, 0.0);
        forward_nd(&mut e, &[n]);
        for (k, v) in e.iter_mut().enumerate() {
            let f = signed_freq(k, n) as f64;
            let nyq = n % 2 == 0 && k == n / 2;
            *v *= if nyq && d % 2 == 1 { C64::default() } else { C64::new(0.0, f).powu(d) };
        }
        crate::fields::spectral::inverse_nd(&mut e, &[n]);
        for i in 0..n {
            m[(i, j)] = e[i].re;
        }
    }
    m
}

/// Method (b): Newton on the collocated equation `(1 + v_xx) v_tt = v_tx²`, Fourier in `x`,
/// Chebyshev in `t`. Returns values at the Chebyshev nodes (`t` increasing).
pub fn collocation_path(v0: &[f64], v1: &[f64], nt: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let nx = v0.len();
    let (t, dt) = chebyshev(nt);
    let dtt = &dt * &dt;
    let dx = fourier_matrix(nx, 1);
    let dxx = fourier_matrix(nx, 2);
    let ni = nt - 1;
    let idx = |k: usize, j: usize| (k - 1) * nx + j;
    let mut v: Vec<Vec<f64>> =
        t.iter().map(|&s| (0..nx).map(|j| (1.0 - s) * v0[j] + s * v1[j]).collect()).collect();
    let residual = |v: &Vec<Vec<f64>>| -> (Vec<f64>, [Vec<Vec<f64>>; 4]) {
        let mut vt = vec![vec![0.0; nx]; nt + 1];
        let mut vtt = vec![vec![0.0; nx]; nt + 1];
        for k in 0..=nt {
            for m in 0..=nt {
                for j in 0..nx {
                    vt[k][j] += dt[(k, m)] * v[m][j];
                    vtt[k][j] += dtt[(k, m)] * v[m][j];
                }
            }
        }
        let app = |mat: &DMatrix<f64>, row: &[f64]| -> Vec<f64> {
            (0..nx).map(|i| (0..nx).map(|j| mat[(i, j)] * row[j]).sum()).collect()
        };
        let vxx: Vec<Vec<f64>> = v.iter().map(|r| app(&dxx, r)).collect();
        let vtx: Vec<Vec<f64>> = vt.iter().map(|r| app(&dx, r)).collect();
        let mut r = vec![0.0; ni * nx];
        for k in 1..nt {
            for j in 0..nx {
                r[idx(k, j)] = (1.0 + vxx[k][j]) * vtt[k][j] - vtx[k][j] * vtx[k][j];
            }
        }
        (r, [vt, vtt, vxx, vtx])
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (mut r, mut aux) = residual(&v);
    for _ in 0..40 {
        if norm(&r) < 1e-13 {
            break;
        }
        let [_, vtt, vxx, vtx] = &aux;
        let n = ni * nx;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 1..nt {
            for j in 0..nx {
                let row = idx(k, j);
                for m in 1..nt {
                    // (1 + v_xx) D_tt
                    jac[(row, idx(m, j))] += (1.0 + vxx[k][j]) * dtt[(k, m)];
                    // −2 v_tx D_t D_x
                    for q in 0..nx {
                        jac[(row, idx(m, q))] -= 2.0 * vtx[k][j] * dt[(k, m)] * dx[(j, q)];
                    }
                }
                // v_tt D_xx
                for q in 0..nx {
                    jac[(row, idx(k, q))] += vtt[k][j] * dxx[(j, q)];
                }
            }
        }
        let lu = jac.lu();
        let step = lu
            .solve(&nalgebra::DVector::from_vec(r.clone()))
            .ok_or_else(|| Error::Singular("collocation Jacobian".into()))?;
        let base = norm(&r);
        let mut lambda = 1.0;
        loop {
            let mut trial = v.clone();
            for k in 1..nt {
                for j in 0..nx {
                    trial[k][j] -= lambda * step[idx(k, j)];
                }
            }
            let (rt, at) = residual(&trial);
            if norm(&rt) < base || lambda < 1e-4 {
                v = trial;
                r = rt;
                aux = at;
                break;
            }
            lambda *= 0.5;
        }
    }
    if norm(&r) > 1e-10 {
        return Err(Error::NoConvergence(format!("collocation residual {:e}", norm(&r))));
    }
    Ok((t, v))
}

/// Barycentric interpolation from Chebyshev–Lobatto nodes (in `t`) to `s`.
fn cheb_interp(t: &[f64], vals: &[Vec<f64>], s: f64) -> Vec<f64> {
    let n = t.len() - 1;
    let nx = vals[0].len();
    let w = |k: usize| {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 || k == n { s * 0.5 } else { s }
    };
    if let Some(k) = t.iter().position(|&tk| (tk - s).abs() < 1e-15) {
        return vals[k].clone();
    }
    let mut num = vec![0.0; nx];
    let mut den = 0.0;
    for k in 0..=n {
        let c = w(k) / (s - t[k]);
        den += c;
        for j in 0..nx {
            num[j] += c * vals[k][j];
        }
    }
    num.iter().map(|x| x / den).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    /// `sup |(a) − (b)|` on the output grid (in `Ψ`).
    pub method_gap: f64,
    /// Change of (b) between its two Chebyshev resolutions.
    pub discretization_estimate: f64,
    pub chebyshev_nodes: usize,
}

/// Cross-validated geodesic between `x`-only potentials on a torus grid with `ny = 1`.
pub fn invariant_geodesic_oracle(
    phi0: &GridField<f64>,
    phi1: &GridField<f64>,
    t_steps: usize,
) -> Result<(GeodesicPath, OracleReport)> {
    let torus = phi0.torus;
    if torus.ny != 1 || (torus.period - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::Shape("oracle expects a 2π-periodic torus grid with ny = 1".into()));
    }
    let nx = torus.nx;
    let v0: Vec<f64> = phi0.values.iter().map(|x| x / 2.0).collect();
    let v1: Vec<f64> = phi1.values.iter().map(|x| x / 2.0).collect();
    let grid = IntervalGrid::with_steps(t_steps);
    let times: Vec<f64> = (0..grid.n_t).map(|k| grid.t(k)).collect();
    let a = legendre_path(&v0, &v1, &times)?;
    let nt = 24;
    let (tc, vc) = collocation_path(&v0, &v1, nt)?;
    let (tc2, vc2) = collocation_path(&v0, &v1, nt - 6)?;
    let mut values = Vec::with_capacity(grid.n_t * nx);
    let (mut gap, mut est) = (0.0f64, 0.0f64);
    for (k, &s) in times.iter().enumerate() {
        let b = if k == 0 { v0.clone() } else if k + 1 == grid.n_t { v1.clone() } else { cheb_interp(&tc, &vc, s) };
        let b2 = cheb_interp(&tc2, &vc2, s);
        for j in 0..nx {
            gap = gap.max(2.0 * (a[k][j] - b[j]).abs());
            est = est.max(2.0 * (b2[j] - b[j]).abs());
            values.push(2.0 * b[j]);
        }
    }
    let allowed = 10.0 * est.max(1e-11);
    if gap > allowed {
        return Err(Error::OracleInvalid { diff: gap, allowed });
    }
    let psi = GridField::from_values(Support::Interval(grid), torus, values)?;
    Ok((GeodesicPath { grid, psi }, OracleReport { method_gap: gap, discretization_estimate: est, chebyshev_nodes: nt }))
}

#[derive(Clone, Debug, Serialize)]
pub struct PathComparison {
    pub sup_diff: f64,
    /// `(index, |a − b|_index)`.
    pub norm_diffs: Vec<(f64, f64)>,
}

/// Compare two paths on the same grids.
pub fn compare_paths(a: &GeodesicPath, b: &GeodesicPath, indices: &[f64]) -> Result<PathComparison> {
    if a.grid != b.grid || a.torus() != b.torus() {
        return Err(Error::Shape("paths on different grids".into()));
    }
    let last = a.grid.n_t - 1;
    let mut ends = 0.0f64;
    for k in [0, last] {
        for (x, y) in a.slice(k).iter().zip(b.slice(k)) {
            ends = ends.max((x - y).abs());
        }
    }
    let d = a.psi.sub(&b.psi);
    // a uniform shift is a legitimate difference; only mismatched endpoint shapes are rejected
    let shift = d.values[0];
    if (0..=last).step_by(last).flat_map(|k| d.slice(k).iter()).any(|v| (v - shift).abs() > 1e-12) && ends > 1e-12 {
        return Err(Error::EndpointMismatch(ends));
    }
    let mut norm_diffs = Vec::new();
    for &r in indices {
        norm_diffs.push((r, holder_norm(&d, HolderIndex::from_real(r))?.value));
    }
    Ok(PathComparison { sup_diff: d.sup(), norm_diffs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn endpoint(torus: TorusGrid, amp: f64) -> GridField<f64> {
        GridField::torus_field(torus, torus.sample(|x, _| amp * x.cos()))
    }

    #[test]
    fn constant_and_drifting_paths_are_geodesics() {
        let torus = TorusGrid::new(16, 4);
        let grid = IntervalGrid::with_steps(10);
        let bg = Background::flat(torus);
        let phi = torus.sample(|x, y| 0.1 * (x + y).sin());
        let mut v = Vec::new();
        for k in 0..grid.n_t {
            v.extend(phi.iter().map(|p| p + 0.3 * grid.t(k)));
        }
        let path = GeodesicPath::new(GridField::from_values(Support::Interval(grid), torus, v).unwrap()).unwrap();
        assert!(geodesic_residual(&path, &bg).unwrap() < 1e-12);
    }

    #[test]
    fn oracle_methods_agree_and_solve_the_equation() {
        let torus = TorusGrid::new(32, 1);
        let (path, rep) = invariant_geodesic_oracle(&endpoint(torus, 0.0), &endpoint(torus, 0.05), 64).unwrap();
        assert!(rep.method_gap < 1e-9, "{rep:?}");
        let r = geodesic_residual(&path, &Background::flat(torus)).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn equal_endpoints_give_constant_path() {
        let torus = TorusGrid::new(16, 1);
        let e = endpoint(torus, 0.1);
        let (path, _) = invariant_geodesic_oracle(&e, &e, 8).unwrap();
        for k in 0..path.grid.n_t {
            for (a, b) in path.slice(k).iter().zip(&e.values) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_amplitude_is_nearly_linear() {
        let torus = TorusGrid::new(16, 1);
        let dev = |amp: f64| {
            let (p, _) = invariant_geodesic_oracle(&endpoint(torus, 0.0), &endpoint(torus, amp), 8).unwrap();
            let mut d = 0.0f64;
            for k in 0..p.grid.n_t {
                let t = p.grid.t(k);
                for (j, v) in p.slice(k).iter().enumerate() {
                    d = d.max((v - t * amp * torus.point(j).0.cos()).abs());
                }
            }
            d
        };
        let ratio = dev(0.02) / dev(0.01);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn comparisons() {
        let torus = TorusGrid::new(16, 1);
        let (p, _) = invariant_geodesic_oracle(&endpoint(torus, 0.0), &endpoint(torus, 0.05), 8).unwrap();
        assert_eq!(compare_paths(&p, &p, &[0.0]).unwrap().sup_diff, 0.0);
        let mut q = p.clone();
        q.psi.values.iter_mut().for_each(|v| *v += 0.25);
        assert!((compare_paths(&p, &q, &[]).unwrap().sup_diff - 0.25).abs() < 1e-15);
        let mut r = p.clone();
        r.psi.values[3] += 0.1;
        assert!(matches!(compare_paths(&p, &r, &[]), Err(Error::EndpointMismatch(_))));
    }
}
