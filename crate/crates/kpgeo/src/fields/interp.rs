//! Local cubic interpolation on uniform bounded grids.

use super::grid::{Value, WindowGrid};

/// Four-point Lagrange stencil for position `x` on nodes `x0 + i·h`, `i < n`.
///
/// The stencil is shifted inward near the ends; `n < 4` falls back to linear.
pub fn cubic_stencil(x: f64, x0: f64, h: f64, n: usize) -> ([usize; 4], [f64; 4], usize) {
    let u = (x - x0) / h;
    if n < 4 {
        let i = (u.floor().max(0.0) as usize).min(n.saturating_sub(2));
        let f = u - i as f64;
        return ([i, (i + 1).min(n - 1), 0, 0], [1.0 - f, f, 0.0, 0.0], 2);
    }
    let i = (u.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
    let mut w = [0.0; 4];
    for a in 0..4 {
        let mut p = 1.0;
        for b in 0..4 {
            if a != b {
                p *= (u - (i + b) as f64) / (a as f64 - b as f64);
            }
        }
        w[a] = p;
    }
    ([i, i + 1, i + 2, i + 3], w, 4)
}

/// Bicubic evaluation of a window field (all torus points at once) at `(θ, t)`.
pub fn window_eval<T: Value>(w: &WindowGrid, values: &[T], torus_len: usize, theta: f64, t: f64) -> Vec<T> {
    let (ia, wa, na) = cubic_stencil(theta, -w.half_width, w.h_theta(), w.n_theta);
    let (ib, wb, nb) = cubic_stencil(t, 0.0, w.h_t(), w.n_t);
    let mut out = vec![T::default(); torus_len];
    for a in 0..na {
        for b in 0..nb {
            let c = wa[a] * wb[b];
            if c == 0.0 {
                continue;
            }
            let p = w.index(ia[a], ib[b]);
            let slice = &values[p * torus_len..(p + 1) * torus_len];
            for (o, &v) in out.iter_mut().zip(slice) {
                *o = *o + v * c;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_exact_on_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let h = 0.1;
        let n = 11;
        let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
        for x in [0.0, 0.03, 0.47, 0.95, 1.0] {
            let (i, w, m) = cubic_stencil(x, 0.0, h, n);
            let v: f64 = (0..m).map(|a| w[a] * vals[i[a]]).sum();
            assert!((v - f(x)).abs() < 1e-13);
        }
    }
}
