//! Index sets for the Moser iteration and their validation.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `ζ` examined by the upward scan.
pub const ZETA_SCAN_LIMIT: u32 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NMIndices {
    pub k: f64,
    pub j: f64,
    pub x: f64,
    pub zeta: u32,
    pub r: f64,
    pub big_b: f64,
    pub alpha: f64,
    pub b: f64,
    pub l: f64,
    pub chi: f64,
}

impl NMIndices {
    /// `B − α`, the index at which the solution is controlled.
    pub fn b_minus_alpha(&self) -> f64 {
        self.big_b - self.alpha
    }

    /// `K = 1 + 2l/r`.
    pub fn growth(&self) -> f64 {
        1.0 + 2.0 * self.l / self.r
    }

    pub fn check(&self) -> [bool; 5] {
        index_inequalities(self.r, self.big_b, self.alpha, self.b, self.l, self.chi)
    }
}

/// Hypotheses on `(k, J)`: `k > 4` and `0 < J < min{1/4, (k−4)/4}`.
pub fn precheck(k: f64, j: f64) -> Result<()> {
    if !(k > 4.0) {
        return Err(Error::InvalidIndices(format!("k = {k} must exceed 4")));
    }
    let cap = 0.25f64.min((k - 4.0) / 4.0);
    if !(j > 0.0 && j < cap) {
        return Err(Error::InvalidIndices(format!("J = {j} must lie in (0, {cap})")));
    }
    Ok(())
}

/// The five index conditions in general form. The second one is only meaningful when
/// `r > 2l + χ` and is counted as failing otherwise.
pub fn index_inequalities(r: f64, big_b: f64, alpha: f64, b: f64, l: f64, chi: f64) -> [bool; 5] {
    let kk = 1.0 + 2.0 * l / r;
    [
        r > big_b && big_b > big_b - alpha && big_b - alpha > b && b > l && l >= 1.0,
        r > 2.0 * l + chi && big_b / chi > kk.powi(3) * (r - big_b) / (r - 2.0 * l - chi),
        big_b / (r - big_b) < kk,
        big_b * (r - b) / (b * (r - big_b)) > kk * kk,
        r.powi(3) * (r + l - big_b + alpha) / ((r + 2.0 * l).powi(3) * (r - big_b)) > (big_b - alpha) / big_b,
    ]
}

/// Indices built from `(k, J)` with `r = ζ + 1/3` for the smallest integer `ζ` passing
/// every condition.
pub fn choose_indices(k: f64, j: f64) -> Result<NMIndices> {
    precheck(k, j)?;
    let x = (1.0f64 / 3.0).min((k - 4.0) / 3.0);
    let (big_b, alpha, b, l, chi) = (k, j, 4.0 + x, 2.0, 4.0);
    for zeta in 1..=ZETA_SCAN_LIMIT {
        let r = zeta as f64 + 1.0 / 3.0;
        if index_inequalities(r, big_b, alpha, b, l, chi).iter().all(|&ok| ok) {
            return Ok(NMIndices { k, j, x, zeta, r, big_b, alpha, b, l, chi });
        }
    }
    Err(Error::InvalidIndices(format!("no ζ ≤ {ZETA_SCAN_LIMIT} satisfies the index conditions")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_one_values() {
        let idx = choose_indices(5.0, 0.1).unwrap();
        assert!((idx.x - 1.0 / 3.0).abs() < 1e-15);
        assert!((idx.b - 13.0 / 3.0).abs() < 1e-15);
        assert_eq!((idx.big_b, idx.alpha, idx.l, idx.chi), (5.0, 0.1, 2.0, 4.0));
        assert!(idx.b_minus_alpha() > idx.b);
        assert!(idx.check().iter().all(|&c| c));
    }

    #[test]
    fn hypotheses_are_enforced() {
        assert!(matches!(choose_indices(4.5, 0.3), Err(Error::InvalidIndices(_))));
        assert!(matches!(choose_indices(4.0, 0.1), Err(Error::InvalidIndices(_))));
        assert!(matches!(choose_indices(6.0, 0.0), Err(Error::InvalidIndices(_))));
    }

    #[test]
    fn growth_factor() {
        let idx = NMIndices { k: 5.0, j: 0.1, x: 1.0 / 3.0, zeta: 16, r: 16.0 + 1.0 / 3.0, big_b: 5.0, alpha: 0.1, b: 13.0 / 3.0, l: 2.0, chi: 4.0 };
        assert!((idx.growth() - 1.244_897_959_183_673_5).abs() < 1e-12);
    }
}
