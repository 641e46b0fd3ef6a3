//! Constant-coefficient Riemann–Hilbert families `A𝔣̄ + S𝔣 − 𝔥 = 𝔟` on the boundary.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fields::C64;
use crate::holo::{HoloDomain, UnitDisc};

/// Smallest `|A|` accepted by [`rh_family_solve`].
pub const DET_THRESHOLD: f64 = 1e-12;

/// Solve one Riemann–Hilbert problem per torus point (column of `b`).
///
/// Returns boundary traces of holomorphic `(𝔣, 𝔥)` with `𝔣(anchor) = 0`. The problem is
/// reduced to two real Dirichlet problems for `Re g₁ = Re 𝔟`, `Re g₂ = Im 𝔟` whose
/// holomorphic completions give `y₁ = (g₁ + ig₂)/2`, `y₂ = (g₁ − ig₂)/2`, `𝔣 = y₂/Ā`,
/// `𝔥 = S𝔣 − y₁`.
pub fn rh_family_solve(
    dom: &dyn HoloDomain,
    a: &[C64],
    s: &[C64],
    b: &DMatrix<C64>,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let (n, t) = (b.nrows(), b.ncols());
    if n != dom.len() || a.len() != t || s.len() != t {
        return Err(Error::Shape("Riemann–Hilbert data".into()));
    }
    if let Some(bad) = a.iter().map(|z| z.norm()).find(|&d| d < DET_THRESHOLD) {
        return Err(Error::NotInvertible(bad));
    }
    let anc = dom.anchor();
    let mut re = DMatrix::<f64>::zeros(n, 2 * t);
    for c in 0..t {
        for j in 0..n {
            re[(j, c)] = b[(j, c)].re;
            re[(j, t + c)] = b[(j, c)].im;
        }
    }
    let im = dom.conjugate(&re);
    let mut f = DMatrix::<C64>::zeros(n, t);
    let mut h = DMatrix::<C64>::zeros(n, t);
    for c in 0..t {
        let ba = b[(anc, c)];
        let ac = a[c].conj();
        for j in 0..n {
            let g1 = C64::new(re[(j, c)], im[(j, c)] + ba.im);
            let g2 = C64::new(re[(j, t + c)], im[(j, t + c)] - ba.re);
            let y1 = (g1 + C64::i() * g2) * 0.5;
            let y2 = (g1 - C64::i() * g2) * 0.5;
            let fj = y2 / ac;
            f[(j, c)] = fj;
            h[(j, c)] = s[c] * fj - y1;
        }
    }
    Ok((f, h))
}

/// Boundary residual `sup |A𝔣̄ + S𝔣 − 𝔥 − 𝔟|`.
pub fn rh_residual(a: &[C64], s: &[C64], f: &DMatrix<C64>, h: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..b.ncols() {
        for j in 0..b.nrows() {
            let r = a[c] * f[(j, c)].conj() + s[c] * f[(j, c)] - h[(j, c)] - b[(j, c)];
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// Holomorphic completion `u + iv` of real data on the unit circle with the mean-zero
/// conjugate (`cos θ ↦ sin θ`).
pub fn harmonic_conjugate(disc: &UnitDisc, u: &[f64]) -> Vec<C64> {
    let m = disc.len();
    let col = DMatrix::from_column_slice(m, 1, u);
    let v = disc.conjugate(&col);
    let mean = v.iter().sum::<f64>() / m as f64;
    (0..m).map(|j| C64::new(u[j], v[(j, 0)] - mean)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero() {
        let d = UnitDisc::new(32);
        let b = DMatrix::<C64>::zeros(32, 3);
        let a = vec![C64::new(0.5, 0.0); 3];
        let s = vec![C64::default(); 3];
        let (f, h) = rh_family_solve(&d, &a, &s, &b).unwrap();
        assert_eq!(f.iter().map(|c| c.norm()).sum::<f64>(), 0.0);
        assert_eq!(h.iter().map(|c| c.norm()).sum::<f64>(), 0.0);
    }

    #[test]
    fn singular_coefficient_rejected() {
        let d = UnitDisc::new(8);
        let b = DMatrix::<C64>::zeros(8, 1);
        let r = rh_family_solve(&d, &[C64::default()], &[C64::default()], &b);
        assert!(matches!(r, Err(Error::NotInvertible(_))));
    }

    #[test]
    fn conjugate_examples() {
        let d = UnitDisc::new(128);
        let u: Vec<f64> = (0..128).map(|j| d.angle(j).cos()).collect();
        let g = harmonic_conjugate(&d, &u);
        for j in 0..128 {
            assert!((g[j].im - d.angle(j).sin()).abs() < 1e-12);
        }
        let u: Vec<f64> = (0..128).map(|j| d.node(j).powu(3).re).collect();
        let g = harmonic_conjugate(&d, &u);
        for j in 0..128 {
            assert!((g[j].im - d.node(j).powu(3).im).abs() < 1e-10);
        }
        let g = harmonic_conjugate(&d, &vec![2.0; 128]);
        assert!(g.iter().all(|c| c.im.abs() < 1e-14));
    }
}
