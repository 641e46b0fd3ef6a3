//! The iteration `f_{n+1} = f_n + S_{M_n} D𝒫_{f_n}⁻¹(S_{N_n}h − 𝒫(f_n))`.

use std::io::Write;

use serde::Serialize;

use super::schedule::NMSchedule;
use crate::error::{Error, Result};
use crate::fields::{holder_norm, GridField, HolderIndex};
use crate::smoothing::smooth;

/// Vector operations the iteration needs on its unknowns.
pub trait NMVector: Clone + Send + Sync {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn sup(&self) -> f64;
    fn norm(&self, r: f64) -> Result<f64>;
    fn smooth(&self, q: f64) -> Result<Self>;
}

/// A map `𝒫` with a right inverse of its derivative.
pub trait NMOperator {
    type V: NMVector;

    fn apply(&self, f: &Self::V) -> Result<Self::V>;

    /// `𝒫(f)` together with `D𝒫_f⁻¹(h_n − 𝒫(f))`.
    fn newton(&self, f: &Self::V, h_n: &Self::V) -> Result<(Self::V, Self::V)>;
}

impl NMVector for GridField<f64> {
    fn add(&self, o: &Self) -> Self {
        GridField::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        GridField::sub(self, o)
    }
    fn sup(&self) -> f64 {
        GridField::sup(self)
    }
    fn norm(&self, r: f64) -> Result<f64> {
        Ok(holder_norm(self, HolderIndex::from_real(r))?.value)
    }
    fn smooth(&self, q: f64) -> Result<Self> {
        Ok(smooth(self, q))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepTrace {
    pub n: usize,
    pub n_gen: f64,
    pub m_gen: f64,
    /// `|𝒫(f_n) − h_n|₀`.
    pub residual_smoothed: f64,
    /// `|𝒫(f_n) − h|₀`.
    pub residual: f64,
    /// `|h_n − h|₀`.
    pub smoothing_error: f64,
    pub f_sup: f64,
    pub f_b: f64,
    pub f_b_alpha: f64,
    /// `|f_n|_{r+l}`, absent when the grid cannot carry that many derivatives.
    pub f_rl: Option<f64>,
    pub v_sup: Option<f64>,
    pub v_b: Option<f64>,
    pub v_b_alpha: Option<f64>,
    pub certified_bound: f64,
    pub bound_holds: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IterationTrace {
    pub steps: Vec<StepTrace>,
    pub converged: bool,
    pub final_residual: f64,
    pub bound_violations: usize,
}

impl IterationTrace {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,N_n,M_n,residual_smoothed,residual,smoothing_error,f_sup,f_b,f_b_alpha,f_rl,v_sup,v_b,v_b_alpha,certified_bound,bound_holds")?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for s in &self.steps {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{},{:e},{}",
                s.n,
                s.n_gen,
                s.m_gen,
                s.residual_smoothed,
                s.residual,
                s.smoothing_error,
                s.f_sup,
                s.f_b,
                s.f_b_alpha,
                opt(s.f_rl),
                opt(s.v_sup),
                opt(s.v_b),
                opt(s.v_b_alpha),
                s.certified_bound,
                s.bound_holds
            )?;
        }
        Ok(())
    }
}

fn optional(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::InsufficientResolution(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Run from `f_0 = f0` until `|𝒫(f_n) − h|₀ < target` or the schedule ends.
pub fn nash_moser_solve<O: NMOperator>(
    op: &O,
    h: &O::V,
    f0: O::V,
    sched: &NMSchedule,
    target: f64,
) -> Result<(O::V, IterationTrace)> {
    let idx = &sched.indices;
    let (b, ba, rl) = (idx.b, idx.b_minus_alpha(), idx.r + idx.l);
    let mut f = f0;
    let mut trace = IterationTrace::default();
    for n in 0..=sched.max_steps {
        let h_n = h.smooth(sched.n[n])?;
        let smoothing_error = h_n.sub(h).sup();
        let last = n == sched.max_steps;
        let (pf, corr) = if last {
            (op.apply(&f)?, None)
        } else {
            let (pf, c) = op.newton(&f, &h_n)?;
            (pf, Some(c))
        };
        let residual = pf.sub(h).sup();
        let residual_smoothed = pf.sub(&h_n).sup();
        let f_b = f.norm(b)?;
        let certified_bound = sched.certified_bound(n);
        let bound_holds = residual_smoothed <= certified_bound && smoothing_error <= sched.smoothing_bound(n);
        let mut rec = StepTrace {
            n,
            n_gen: sched.n[n],
            m_gen: sched.m[n],
            residual_smoothed,
            residual,
            smoothing_error,
            f_sup: f.sup(),
            f_b,
            f_b_alpha: f.norm(ba)?,
            f_rl: optional(f.norm(rl))?,
            v_sup: None,
            v_b: None,
            v_b_alpha: None,
            certified_bound,
            bound_holds,
        };
        if !bound_holds {
            trace.bound_violations += 1;
        }
        trace.final_residual = residual;
        if f_b > sched.eps {
            trace.steps.push(rec);
            return Err(Error::LeftNeighborhood { step: n, norm: f_b, eps: sched.eps });
        }
        if residual < target || corr.is_none() {
            trace.converged = residual < target;
            trace.steps.push(rec);
            return Ok((f, trace));
        }
        let v = corr.expect("correction present").smooth(sched.m[n])?;
        rec.v_sup = Some(v.sup());
        rec.v_b = Some(v.norm(b)?);
        rec.v_b_alpha = Some(v.norm(ba)?);
        trace.steps.push(rec);
        f = f.add(&v);
    }
    unreachable!("the loop returns at n = max_steps")
}

/// `𝒫(f) = f + f²` on torus fields, with `D𝒫_f⁻¹ g = g/(1 + 2f)`.
pub struct ToyOperator;

impl NMOperator for ToyOperator {
    type V = GridField<f64>;

    fn apply(&self, f: &Self::V) -> Result<Self::V> {
        Ok(f.map(|v| v + v * v))
    }

    fn newton(&self, f: &Self::V, h_n: &Self::V) -> Result<(Self::V, Self::V)> {
        let pf = self.apply(f)?;
        let mut c = h_n.sub(&pf);
        for (ci, fi) in c.values.iter_mut().zip(&f.values) {
            *ci /= 1.0 + 2.0 * fi;
        }
        Ok((pf, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::TorusGrid;
    use crate::nash_moser::{choose_indices, derive_schedule};

    fn schedule(h_b: f64) -> NMSchedule {
        let idx = choose_indices(5.0, 0.1).unwrap();
        derive_schedule(&idx, 1.5, 1.5, 0.5, h_b, 12).unwrap()
    }

    #[test]
    fn zero_target_takes_no_steps() {
        let g = TorusGrid::new(32, 1);
        let h = GridField::torus_field(g, vec![0.0; 32]);
        let (f, tr) = nash_moser_solve(&ToyOperator, &h, h.clone(), &schedule(0.0), 1e-12).unwrap();
        assert_eq!(f.sup(), 0.0);
        assert_eq!(tr.steps.len(), 1);
        assert!(tr.converged);
    }

    #[test]
    fn toy_converges() {
        let g = TorusGrid::new(32, 1);
        let h = GridField::torus_field(g, g.sample(|x, _| 0.05 * x.cos()));
        let hb = h.norm(5.0).unwrap();
        let (f, tr) = nash_moser_solve(&ToyOperator, &h, h.map(|_| 0.0), &schedule(hb), 1e-10).unwrap();
        assert!(tr.converged && tr.steps.len() <= 12, "{tr:?}");
        let err = ToyOperator.apply(&f).unwrap().sub(&h).sup();
        assert!(err < 1e-8);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), tr.steps.len() + 1);
    }

    #[test]
    fn leaving_the_neighbourhood_aborts() {
        let g = TorusGrid::new(32, 1);
        let h = GridField::torus_field(g, g.sample(|x, _| 2.0 * x.cos()));
        let idx = choose_indices(5.0, 0.1).unwrap();
        let s = derive_schedule(&idx, 1.5, 1.5, 0.5, 2.0, 12).unwrap();
        let r = nash_moser_solve(&ToyOperator, &h, h.map(|_| 0.0), &s, 1e-10);
        assert!(matches!(r, Err(Error::LeftNeighborhood { .. })));
    }
}
