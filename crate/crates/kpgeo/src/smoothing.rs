//! Nash-type smoothing operators on grid fields.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::spectral::{forward_nd, inverse_nd, signed_freq};
use crate::fields::{GridField, Support, Value, WindowGrid, C64};

/// Radial symbol: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, degree-7 polynomial transition.
pub fn chi(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let s = 2.0 * x - 1.0;
        1.0 - s.powi(4) * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s.powi(3))
    }
}

/// C^∞ step from 0 (at `x ≤ 0`) to 1 (at `x ≥ 1`).
pub fn smooth_step(x: f64) -> f64 {
    let psi = |y: f64| if y <= 0.0 { 0.0 } else { (-1.0 / y).exp() };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        psi(x) / (psi(x) + psi(1.0 - x))
    }
}

/// Cutoff with `η = 1` on `|t| ≤ 1/6` and `η = 0` on `|t| ≥ 1/3`.
pub fn eta(t: f64) -> f64 {
    1.0 - smooth_step((t.abs() - 1.0 / 6.0) * 6.0)
}

#[derive(Clone, Debug)]
struct ExtAxis {
    /// Extended length.
    len: usize,
    /// Wavenumber of one FFT bin.
    dk: f64,
    /// Source index of each extended index.
    src: Vec<usize>,
}

fn ext_axis(n: usize, spacing: f64, periodic: bool) -> ExtAxis {
    if periodic || n == 1 {
        return ExtAxis { len: n, dk: 2.0 * PI / (n as f64 * spacing), src: (0..n).collect() };
    }
    let len = 2 * (n - 1);
    let src = (0..len).map(|e| if e < n { e } else { len - e }).collect();
    ExtAxis { len, dk: 2.0 * PI / (len as f64 * spacing), src }
}

fn apply_symbol(data: &mut [C64], dims: &[usize], dks: &[f64], q: f64) {
    forward_nd(data, dims);
    let nd = dims.len();
    let mut idx = vec![0usize; nd];
    for v in data.iter_mut() {
        let mut r2 = 0.0;
        for a in 0..nd {
            let k = signed_freq(idx[a], dims[a]) as f64 * dks[a];
            r2 += k * k;
        }
        *v *= chi(r2.sqrt() / q);
        for a in (0..nd).rev() {
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    inverse_nd(data, dims);
}

/// `S_Q`: periodic directions are filtered directly, bounded directions after even
/// reflection. Masked planar grids are zero-extended outside the domain.
pub fn smooth<T: Value>(field: &GridField<T>, q: f64) -> GridField<T> {
    assert!(q >= 1.0, "smoothing scale must be at least 1");
    let (axes, map) = field.tensor_axes();
    let ext: Vec<ExtAxis> = axes.iter().map(|a| ext_axis(a.n, a.spacing, a.periodic)).collect();
    let dims: Vec<usize> = ext.iter().map(|e| e.len).collect();
    let box_dims: Vec<usize> = axes.iter().map(|a| a.n).collect();
    let block = field.torus.len();
    let box_value = |bi: usize| -> C64 {
        match &map {
            None => field.values[bi].to_c64(),
            Some(m) => {
                let (node, j) = (bi / block, bi % block);
                m[node].map(|p| field.values[p * block + j].to_c64()).unwrap_or_default()
            }
        }
    };
    let total: usize = dims.iter().product();
    let nd = dims.len();
    let mut data = vec![C64::default(); total];
    let mut idx = vec![0usize; nd];
    for v in data.iter_mut() {
        let mut bi = 0;
        for a in 0..nd {
            bi = bi * box_dims[a] + ext[a].src[idx[a]];
        }
        *v = box_value(bi);
        for a in (0..nd).rev() {
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    let dks: Vec<f64> = ext.iter().map(|e| e.dk).collect();
    apply_symbol(&mut data, &dims, &dks, q);
    let mut out = field.clone();
    let box_total: usize = box_dims.iter().product();
    let mut bidx = vec![0usize; nd];
    for bi in 0..box_total {
        let mut e = 0;
        for a in 0..nd {
            e = e * dims[a] + bidx[a];
        }
        let v = T::from_c64(data[e]);
        match &map {
            None => out.values[bi] = v,
            Some(m) => {
                let (node, j) = (bi / block, bi % block);
                if let Some(p) = m[node] {
                    out.values[p * block + j] = v;
                }
            }
        }
        for a in (0..nd).rev() {
            bidx[a] += 1;
            if bidx[a] < box_dims[a] {
                break;
            }
            bidx[a] = 0;
        }
    }
    out
}

/// Largest `|φ|` on the window edges `t = 0, 1`.
pub fn edge_sup(w: &WindowGrid, values: &[f64], tl: usize) -> f64 {
    let mut m = 0.0f64;
    for i in 0..w.n_theta {
        for k in [0, w.n_t - 1] {
            let p = w.index(i, k);
            for v in &values[p * tl..(p + 1) * tl] {
                m = m.max(v.abs());
            }
        }
    }
    m
}

/// Extension `E(φ)` to the box `{−3 < θ < 3} × {−1 < t < 2}`: even reflection in `θ`,
/// odd reflection in `t`, times a smooth cutoff. Returns (box values, θ-count, t-count).
pub fn extend_to_box(w: &WindowGrid, values: &[f64], tl: usize) -> (Vec<f64>, usize, usize) {
    let (ht, hth) = (w.h_t(), w.h_theta());
    let nth = (6.0 / hth).round() as usize;
    let nt = (3.0 / ht).round() as usize;
    let mut out = vec![0.0; nth * nt * tl];
    let cut = |x: f64, lo: f64, hi: f64, edge: f64| -> f64 {
        if x < lo {
            smooth_step((x - (lo - edge)) / edge)
        } else if x > hi {
            smooth_step(((hi + edge) - x) / edge)
        } else {
            1.0
        }
    };
    for i in 0..nth {
        let th = -3.0 + i as f64 * hth;
        let zth = cut(th, -2.0, 2.0, 0.9);
        if zth == 0.0 {
            continue;
        }
        let src_th = if th > 2.0 { 4.0 - th } else if th < -2.0 { -4.0 - th } else { th };
        let si = ((src_th + 2.0) / hth).round() as usize;
        for k in 0..nt {
            let t = -1.0 + k as f64 * ht;
            let z = zth * cut(t, 0.0, 1.0, 0.9);
            if z == 0.0 {
                continue;
            }
            let (src_t, sign) = if t < 0.0 {
                (-t, -1.0)
            } else if t > 1.0 {
                (2.0 - t, -1.0)
            } else {
                (t, 1.0)
            };
            let sk = (src_t / ht).round() as usize;
            let p = w.index(si, sk);
            let dst = (i * nt + k) * tl;
            for j in 0..tl {
                out[dst + j] = sign * z * values[p * tl + j];
            }
        }
    }
    (out, nth, nt)
}

/// `𝒮_N E(φ)` restricted to the window (before the edge correction).
pub fn smooth_extended(field: &GridField<f64>, n: f64) -> Result<GridField<f64>> {
    let w = match &field.support {
        Support::Window(w) => *w,
        other => return Err(Error::Shape(format!("window field expected, got {}", other.kind()))),
    };
    let tl = field.torus.len();
    let (ext, nth, nt) = extend_to_box(&w, &field.values, tl);
    let dims = [nth, nt, field.torus.ny, field.torus.nx];
    let s = 2.0 * PI / field.torus.period;
    let dks = [2.0 * PI / 6.0, 2.0 * PI / 3.0, s, s];
    let mut data: Vec<C64> = ext.iter().map(|&v| C64::new(v, 0.0)).collect();
    apply_symbol(&mut data, &dims, &dks, n);
    let (ht, hth) = (w.h_t(), w.h_theta());
    let mut out = field.clone();
    for i in 0..w.n_theta {
        let bi = ((w.theta(i) + 3.0) / hth).round() as usize;
        for k in 0..w.n_t {
            let bk = ((w.t(k) + 1.0) / ht).round() as usize;
            let src = (bi * nt + bk) * tl;
            let p = w.index(i, k);
            for j in 0..tl {
                out.values[p * tl + j] = data[src + j].re;
            }
        }
    }
    Ok(out)
}

/// `𝒮̃_N`: smoothing that preserves vanishing on `t = 0, 1`.
pub fn smooth_vanishing(field: &GridField<f64>, n: f64) -> Result<GridField<f64>> {
    let w = match &field.support {
        Support::Window(w) => *w,
        other => return Err(Error::Shape(format!("window field expected, got {}", other.kind()))),
    };
    let tl = field.torus.len();
    let edge = edge_sup(&w, &field.values, tl);
    if edge > 1e-10 * field.sup().max(1.0) {
        return Err(Error::NotVanishing(edge));
    }
    let mut out = smooth_extended(field, n)?;
    for i in 0..w.n_theta {
        let p0 = w.index(i, 0);
        let p1 = w.index(i, w.n_t - 1);
        let tr0: Vec<f64> = out.slice(p0).to_vec();
        let tr1: Vec<f64> = out.slice(p1).to_vec();
        for k in 0..w.n_t {
            let t = w.t(k);
            let (e0, e1) = (eta(t), eta(1.0 - t));
            let p = w.index(i, k);
            for j in 0..tl {
                out.values[p * tl + j] -= e0 * tr0[j] + e1 * tr1[j];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::TorusGrid;

    #[test]
    fn symbol_profile() {
        assert_eq!(chi(0.3), 1.0);
        assert_eq!(chi(1.2), 0.0);
        assert!((chi(0.75) - 0.5).abs() < 1e-12);
        assert!((eta(0.1) - 1.0).abs() < 1e-15 && eta(0.4) == 0.0);
    }

    #[test]
    fn band_limited_fields_pass_through() {
        let g = TorusGrid::new(32, 32);
        let c = GridField::torus_field(g, vec![0.7; g.len()]);
        assert!(smooth(&c, 1.0).dist_sup(&c) < 1e-14);
        let s = GridField::torus_field(g, g.sample(|x, _| x.sin()));
        assert!(smooth(&s, 8.0).dist_sup(&s) < 1e-10);
    }

    #[test]
    fn vanishing_smoother_keeps_edges_zero() {
        let w = WindowGrid::with_cells(8);
        let g = TorusGrid::new(16, 1);
        let mut v = Vec::new();
        for p in 0..w.len() {
            let (th, t) = w.node(p);
            for j in 0..g.len() {
                v.push((PI * t).sin() * g.point(j).0.cos() * (1.0 + 0.1 * th));
            }
        }
        let f = GridField::from_values(Support::Window(w), g, v).unwrap();
        let s = smooth_vanishing(&f, 16.0).unwrap();
        assert!(edge_sup(&w, &s.values, g.len()) < 1e-15);
        let zero = GridField::<f64>::zeros(Support::Window(w), g);
        assert_eq!(smooth_vanishing(&zero, 4.0).unwrap().sup(), 0.0);
        let mut bad = f.clone();
        bad.values[0] = 1.0;
        assert!(matches!(smooth_vanishing(&bad, 4.0), Err(Error::NotVanishing(_))));
    }
}
