//! Index selection, parameter schedule and the smoothed Newton iteration.

pub mod indices;
pub mod schedule;
pub mod solve;
pub mod strip;

pub use indices::{choose_indices, index_inequalities, precheck, NMIndices};
pub use schedule::{derive_schedule, NMSchedule, ScheduleChecks};
pub use solve::{nash_moser_solve, IterationTrace, NMOperator, NMVector, StepTrace, ToyOperator};
pub use strip::StripOperator;
