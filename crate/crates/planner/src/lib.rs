//! Planning on top of the incremental engine: encodings, horizon scheduling
//! and the multishot driver.

pub mod encoder;
pub mod planner;
pub mod schedule;
pub mod simulate;
#[cfg(any(test, feature = "testing"))]
pub mod testing;

pub use encoder::{HorizonEncoding, Mode, VarAtom};
pub use planner::{
    attach_heuristic, guess_and_check_round, nogood, plan, GcStrategy, GcVerdict, Nogood, PlanError, PlanOutcome, PlanResult, PlanStats,
    PlannerConfig, StepFailure,
};
pub use schedule::{Algorithm, Budget, ScheduleConfig, Scheduler, Tick, Verdict};

/// Scheduler measuring time in engine conflicts.
pub type Schedule = Scheduler<f64>;
/// Scheduler over exact rationals, used for simulation.
pub type ExactSchedule = Scheduler<num_rational::Ratio<i128>>;
