//! Composition with grid maps and boundary traces.

use rayon::prelude::*;

use super::grid::{GridField, Support, Value, C64};
use super::interp::window_eval;
use super::spectral::TorusSpectral;
use crate::error::{Error, Result};

/// A map of the product grid into itself.
///
/// `torus_shift[p·T + j]` displaces torus node `j` over planar node `p` by `(dx, dy)`;
/// `planar_target[p]` (window supports only) moves the planar node to `t + iθ`.
#[derive(Clone, Debug, Default)]
pub struct GridMap {
    pub torus_shift: Option<Vec<(f64, f64)>>,
    pub planar_target: Option<Vec<C64>>,
}

impl GridMap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn uniform_shift<T: Value>(field: &GridField<T>, dx: f64, dy: f64) -> Self {
        Self {
            torus_shift: Some(vec![(dx, dy); field.values.len()]),
            planar_target: None,
        }
    }
}

/// `field ∘ map`: spectral interpolation along the torus, bicubic in the window.
pub fn compose<T: Value>(field: &GridField<T>, map: &GridMap) -> Result<GridField<T>> {
    let tl = field.torus.len();
    let np = field.planar_len();
    let mut out = field.clone();
    if let Some(targets) = &map.planar_target {
        let w = match &field.support {
            Support::Window(w) => *w,
            other => {
                return Err(Error::Shape(format!(
                    "planar composition needs a window field, got {}",
                    other.kind()
                )))
            }
        };
        let tol = 1e-9;
        for (p, z) in targets.iter().enumerate() {
            let (t, th) = (z.re, z.im);
            if t < -tol || t > 1.0 + tol || th.abs() > w.half_width + tol {
                return Err(Error::OutsideDomain(format!("target t={t}, θ={th}")));
            }
            let v = window_eval(&w, &field.values, tl, th, t);
            out.values[p * tl..(p + 1) * tl].copy_from_slice(&v);
        }
    }
    if let Some(shift) = &map.torus_shift {
        if shift.len() != np * tl {
            return Err(Error::Shape("torus shift length".into()));
        }
        let sp = TorusSpectral::new(field.torus);
        let src = out.values.clone();
        out.values
            .par_chunks_mut(tl)
            .enumerate()
            .for_each(|(p, dst)| {
                let sh = &shift[p * tl..(p + 1) * tl];
                if sh.iter().all(|&(a, b)| a == 0.0 && b == 0.0) {
                    return;
                }
                let slice: Vec<C64> = src[p * tl..(p + 1) * tl].iter().map(|v| v.to_c64()).collect();
                let it = sp.interp(&slice);
                for j in 0..tl {
                    let (x, y) = field.torus.point(j);
                    dst[j] = T::from_c64(it.eval(x + sh[j].0, y + sh[j].1));
                }
            });
    }
    Ok(out)
}

/// Restriction of a field to a named boundary component.
///
/// Selectors: `t0`, `t1` (window and interval), `boundary` (planar domains).
pub fn trace<T: Value>(field: &GridField<T>, selector: &str) -> Result<GridField<T>> {
    let tl = field.torus.len();
    match (&field.support, selector) {
        (Support::Window(w), "t0" | "t1") => {
            let k = if selector == "t0" { 0 } else { w.n_t - 1 };
            let mut values = Vec::with_capacity(w.n_theta * tl);
            for i in 0..w.n_theta {
                values.extend_from_slice(field.slice(w.index(i, k)));
            }
            GridField::from_values(Support::Segment { nodes: w.n_theta, spacing: w.h_theta() }, field.torus, values)
        }
        (Support::Interval(g), "t0" | "t1") => {
            let k = if selector == "t0" { 0 } else { g.n_t - 1 };
            GridField::from_values(Support::Torus, field.torus, field.slice(k).to_vec())
        }
        (Support::Planar(g), "boundary") => {
            let start = g.n_interior() * tl;
            GridField::from_values(
                Support::Boundary { nodes: g.boundary_samples, length: g.curve.length() },
                field.torus,
                field.values[start..].to_vec(),
            )
        }
        _ => Err(Error::UnknownSelector(selector.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::{TorusGrid, WindowGrid};
    use std::f64::consts::PI;

    #[test]
    fn identity_is_bitwise() {
        let g = TorusGrid::new(16, 3);
        let f = GridField::torus_field(g, g.sample(|x, y| (x + 2.0 * y).sin() + 0.3));
        let c = compose(&f, &GridMap::identity()).unwrap();
        assert_eq!(c.values, f.values);
        let z = compose(&f, &GridMap::uniform_shift(&f, 0.0, 0.0)).unwrap();
        assert_eq!(z.values, f.values);
    }

    #[test]
    fn shifted_sine() {
        let g = TorusGrid::new(256, 1);
        let f = GridField::torus_field(g, g.sample(|x, _| x.sin()));
        let s = compose(&f, &GridMap::uniform_shift(&f, 0.3, 0.0)).unwrap();
        let exact = g.sample(|x, _| (x + 0.3).sin());
        let err = s.values.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-8);
        let p = compose(&f, &GridMap::uniform_shift(&f, 2.0 * PI, 0.0)).unwrap();
        assert!(p.dist_sup(&f) < 1e-12);
    }

    #[test]
    fn traces_of_window_field() {
        let w = WindowGrid::with_cells(8);
        let g = TorusGrid::new(4, 1);
        let mut v = Vec::new();
        for p in 0..w.len() {
            let (_, t) = w.node(p);
            v.extend(std::iter::repeat(t * (1.0 - t)).take(4));
        }
        let f = GridField::from_values(Support::Window(w), g, v).unwrap();
        assert_eq!(trace(&f, "t0").unwrap().sup(), 0.0);
        assert_eq!(trace(&f, "t1").unwrap().sup(), 0.0);
        assert!(trace(&f, "boundary").is_err());
    }
}
