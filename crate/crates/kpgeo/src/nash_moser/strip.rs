//! The strip map `𝒫` as an operator for the iteration.

use std::sync::Mutex;

use super::solve::{NMOperator, NMVector};
use crate::error::Result;
use crate::strip_geodesic::ops::NeumannReport;
use crate::strip_geodesic::{StripProblem, StripTriple};

impl NMVector for StripTriple {
    fn add(&self, o: &Self) -> Self {
        StripTriple::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        StripTriple::sub(self, o)
    }
    fn sup(&self) -> f64 {
        StripTriple::sup(self)
    }
    fn norm(&self, r: f64) -> Result<f64> {
        self.holder(r)
    }
    fn smooth(&self, q: f64) -> Result<Self> {
        StripTriple::smooth(self, q)
    }
}

/// `𝒫` on strip triples; each Newton step costs one strip solve plus a Neumann series.
pub struct StripOperator<'p, 'g> {
    pub prob: &'p StripProblem<'g>,
    /// Neumann reports of the Newton steps taken so far.
    pub neumann: Mutex<Vec<NeumannReport>>,
}

impl<'p, 'g> StripOperator<'p, 'g> {
    pub fn new(prob: &'p StripProblem<'g>) -> Self {
        Self { prob, neumann: Mutex::new(Vec::new()) }
    }
}

impl NMOperator for StripOperator<'_, '_> {
    type V = StripTriple;

    fn apply(&self, f: &StripTriple) -> Result<StripTriple> {
        self.prob.apply(f)
    }

    fn newton(&self, f: &StripTriple, h_n: &StripTriple) -> Result<(StripTriple, StripTriple)> {
        let lin = self.prob.linearize(f)?;
        let pf = lin.value();
        let (d, rep) = lin.inverse(&h_n.sub(&pf))?;
        self.neumann.lock().expect("neumann log").push(rep);
        Ok((pf, d))
    }
}
