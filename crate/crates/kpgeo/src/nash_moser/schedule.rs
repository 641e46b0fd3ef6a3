//! Parameter schedule `K, λ, A, μ` and the smoothing generators `N_n`, `M_n`.

use serde::Serialize;

use super::indices::NMIndices;
use crate::error::{Error, Result};

/// Number of doublings tried above the analytic lower bound for `A`.
pub const A_DOUBLINGS: u32 = 20;

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleChecks {
    /// `λ > b/(r − b)`.
    pub s31: bool,
    /// `e^{A(K−1)} ≥ max(2, 4CC₀)`.
    pub s32: bool,
    /// `λ(2 − K) > (λ + K)χ/r`.
    pub s34_half: bool,
    /// `48C₀³ ≤ e^{AK(λ(2−K) − (λ+K)χ/r)}`.
    pub s34: bool,
    /// `μ ≤ ε(1 − e^{A(K−1)(−λ + bλ/(r+l) + Kb/(r+l))})/(2CC₀)`.
    pub s41: bool,
    /// `λ > (B − α)(λ + K)/(r + l)`.
    pub s51: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NMSchedule {
    pub indices: NMIndices,
    pub k_growth: f64,
    pub lambda: f64,
    pub a: f64,
    pub a_min: f64,
    pub mu: f64,
    pub c0: f64,
    pub c: f64,
    pub eps: f64,
    pub h_norm_b: f64,
    /// Right-hand side of the smallness condition on `|h|_B`.
    pub smallness_bound: f64,
    pub max_steps: usize,
    /// `(lower, upper)` endpoints of the admissible `N_n` and `M_n`.
    pub n_interval: Vec<(f64, f64)>,
    pub m_interval: Vec<(f64, f64)>,
    pub n: Vec<f64>,
    pub m: Vec<f64>,
    pub checks: ScheduleChecks,
}

impl NMSchedule {
    /// `μ e^{−λAK^n}`.
    pub fn certified_bound(&self, n: usize) -> f64 {
        self.mu * (-self.lambda * self.a * self.k_growth.powi(n as i32)).exp()
    }

    /// `(1/3) μ e^{−λAK^{n+1}}`.
    pub fn smoothing_bound(&self, n: usize) -> f64 {
        self.certified_bound(n + 1) / 3.0
    }

    pub fn smallness_holds(&self) -> bool {
        self.h_norm_b <= self.smallness_bound
    }
}

struct Logs {
    k: f64,
    lambda: f64,
}

impl Logs {
    /// Log-endpoints of the `N_n` interval.
    fn s11(&self, idx: &NMIndices, a: f64, c: f64, n: usize) -> (f64, f64) {
        let (bb, r) = (idx.big_b, idx.r);
        let akn = a * self.k.powi(n as i32);
        let lo = (3.0 * c).ln() / bb + akn * self.lambda * self.k / bb;
        let hi = -c.ln() / (r - bb) + akn / (r - bb);
        (lo, hi)
    }

    /// Log-endpoints of the `M_n` interval.
    fn s33(&self, idx: &NMIndices, a: f64, c0: f64, c: f64, n: usize) -> (f64, f64) {
        let (r, l) = (idx.r, idx.l);
        let akn = a * self.k.powi(n as i32);
        let lo = (36.0 * c0.powi(3) * c).ln() + akn * (1.0 + self.lambda * self.k) / r;
        let hi = -(12.0 * c0 * c0 * c).ln() / l + akn * (self.k - 1.0) / l;
        (lo, hi)
    }

    fn e34(&self, idx: &NMIndices) -> f64 {
        self.lambda * (2.0 - self.k) - (self.lambda + self.k) * idx.chi / idx.r
    }

    fn e41(&self, idx: &NMIndices, a: f64) -> f64 {
        let rl = idx.r + idx.l;
        a * (self.k - 1.0) * (-self.lambda + idx.b * self.lambda / rl + self.k * idx.b / rl)
    }
}

/// Derive `K`, `λ`, `A`, `μ` and the per-step generators for `n = 0..=max_steps`.
///
/// `A` is the first value `A_min·2^j` for which every exponential inequality holds and
/// both intervals are nonempty at every step.
pub fn derive_schedule(idx: &NMIndices, c0: f64, c: f64, eps: f64, h_norm_b: f64, max_steps: usize) -> Result<NMSchedule> {
    if !(c0 > 0.0 && c > 0.0 && eps > 0.0 && h_norm_b >= 0.0) {
        return Err(Error::Schedule(format!("constants must be positive (C₀ = {c0}, C = {c}, ε = {eps}, |h|_B = {h_norm_b})")));
    }
    if !idx.check().iter().all(|&ok| ok) {
        return Err(Error::InvalidIndices(format!("{idx:?}")));
    }
    let k = idx.growth();
    let lambda = idx.big_b / (k * k * (idx.r - idx.big_b));
    let lg = Logs { k, lambda };
    let s31 = lambda > idx.b / (idx.r - idx.b);
    let s34_half = lg.e34(idx) > 0.0;
    let s51 = lambda > idx.b_minus_alpha() * (lambda + k) / (idx.r + idx.l);
    if !(s31 && s34_half && s51) {
        return Err(Error::Schedule(format!("index-level requirements fail: S31 {s31}, S34' {s34_half}, S51 {s51}")));
    }

    let a32 = 2f64.max(4.0 * c * c0).ln() / (k - 1.0);
    let a34 = (48.0 * c0.powi(3)).ln().max(0.0) / (k * lg.e34(idx));
    let g11 = 1.0 / (idx.r - idx.big_b) - lambda * k / idx.big_b;
    let g33 = (k - 1.0) / idx.l - (1.0 + lambda * k) / idx.r;
    if !(g11 > 0.0 && g33 > 0.0) {
        return Err(Error::Schedule("interval gaps do not grow with n".into()));
    }
    let a11 = ((3.0 * c).ln() / idx.big_b + c.ln() / (idx.r - idx.big_b)).max(0.0) / g11;
    let a33 = ((36.0 * c0.powi(3) * c).ln() + (12.0 * c0 * c0 * c).ln() / idx.l).max(0.0) / g33;
    let a_min = a32.max(a34).max(a11).max(a33).max(f64::MIN_POSITIVE);

    let feasible = |a: f64| -> Option<(Vec<(f64, f64)>, Vec<(f64, f64)>)> {
        if (a * (k - 1.0)).exp() < 2f64.max(4.0 * c * c0) {
            return None;
        }
        if 48.0 * c0.powi(3) > (a * k * lg.e34(idx)).exp() {
            return None;
        }
        let mut ni = Vec::with_capacity(max_steps + 1);
        let mut mi = Vec::with_capacity(max_steps + 1);
        for n in 0..=max_steps {
            let s11 = lg.s11(idx, a, c, n);
            let s33 = lg.s33(idx, a, c0, c, n);
            if s11.0 > s11.1 || s33.0 > s33.1 {
                return None;
            }
            ni.push(s11);
            mi.push(s33);
        }
        Some((ni, mi))
    };
    let mut found = None;
    for j in 0..=A_DOUBLINGS {
        let a = a_min * 2f64.powi(j as i32);
        if let Some(iv) = feasible(a) {
            found = Some((a, iv));
            break;
        }
    }
    let (a, (n_log, m_log)) = found.ok_or_else(|| {
        Error::Schedule(format!("no A in A_min·2^j, j ≤ {A_DOUBLINGS}, with A_min = {a_min:e}"))
    })?;

    let mu = 2.0 * h_norm_b * (lambda * a * k).exp();
    let shrink = 1.0 - lg.e41(idx, a).exp();
    let s41 = mu <= eps * shrink / (2.0 * c * c0);
    let decay = (-lambda * a * k).exp();
    let smallness_bound = (eps * shrink * decay / (4.0 * c * c0)).min(0.25 * decay);
    let exp_pair = |v: &Vec<(f64, f64)>| v.iter().map(|&(lo, hi)| (lo.exp(), hi.exp())).collect::<Vec<_>>();
    let mid = |v: &Vec<(f64, f64)>| v.iter().map(|&(lo, hi)| (0.5 * (lo + hi)).exp()).collect::<Vec<_>>();
    Ok(NMSchedule {
        indices: *idx,
        k_growth: k,
        lambda,
        a,
        a_min,
        mu,
        c0,
        c,
        eps,
        h_norm_b,
        smallness_bound,
        max_steps,
        n_interval: exp_pair(&n_log),
        m_interval: exp_pair(&m_log),
        n: mid(&n_log),
        m: mid(&m_log),
        checks: ScheduleChecks { s31, s32: true, s34_half, s34: true, s41, s51 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nash_moser::indices::choose_indices;

    #[test]
    fn schedule_for_default_indices() {
        let idx = choose_indices(5.0, 0.1).unwrap();
        let s = derive_schedule(&idx, 1.5, 1.5, 0.1, 0.05, 20).unwrap();
        assert!((s.k_growth - (1.0 + 4.0 / idx.r)).abs() < 1e-15);
        assert!(s.lambda > idx.b / (idx.r - idx.b));
        assert!((s.a * (s.k_growth - 1.0)).exp() >= 2f64.max(4.0 * 1.5 * 1.5));
        for n in 0..=20 {
            let (lo, hi) = s.n_interval[n];
            assert!(lo <= s.n[n] && s.n[n] <= hi);
            let (lo, hi) = s.m_interval[n];
            assert!(lo <= s.m[n] && s.m[n] <= hi);
        }
        assert!(!s.smallness_holds());
    }

    #[test]
    fn zero_data_gives_zero_mu() {
        let idx = choose_indices(6.0, 0.2).unwrap();
        let s = derive_schedule(&idx, 1.5, 1.5, 0.1, 0.0, 5).unwrap();
        assert_eq!(s.mu, 0.0);
        assert!(s.checks.s41);
    }
}
