//! Replays a scheduler against scripted per-horizon costs instead of an engine.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::schedule::{Algorithm, Budget, ScheduleConfig, Scheduler, Tick, Verdict};

/// Time each horizon needs before it reports its verdict.
#[derive(Clone, Debug)]
pub struct CostProfile<S> {
    pub costs: Vec<(Verdict, S)>,
    /// Cost of every horizon past the listed ones.
    pub tail: (Verdict, S),
}

impl<S: Clone> CostProfile<S> {
    pub fn cost(&self, horizon: usize) -> (Verdict, S) {
        self.costs.get(horizon).cloned().unwrap_or_else(|| self.tail.clone())
    }
}

pub type Exact = Ratio<i128>;

fn q(n: i128, d: i128) -> Exact {
    Ratio::new(n, d)
}

/// Costs behind the worked scheduling example: horizons 0-4 unsatisfiable
/// (2, 2, 4, 9, 16 units), satisfiable from 5 on.
///
/// Only the unsatisfiable costs and the cost at 5 are given outright. The rest
/// is reconstructed so that the narrated runs come out: under `A(5)` horizons
/// 3 to 7 each get 4 more units after 0 and 1 finish, and horizon 7 finishes
/// in that stretch; under `B(0.8)` horizon 8 finishes within its 2-unit share.
pub fn reference_profile() -> CostProfile<Exact> {
    let unsat = |c: i128| (Verdict::Unsat, q(c, 1));
    let sat = |n: i128, d: i128| (Verdict::Sat, q(n, d));
    CostProfile {
        costs: vec![
            unsat(2),
            unsat(2),
            unsat(4),
            unsat(9),
            unsat(16),
            sat(13, 1),
            sat(8, 1),
            sat(4, 1),
            sat(49, 25),
            sat(3, 1),
            sat(4, 1),
            sat(5, 1),
        ],
        tail: sat(6, 1),
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome<S> {
    pub found: Option<usize>,
    /// Exact time per touched horizon.
    pub spent: BTreeMap<usize, S>,
    /// Sum of exact time over all horizons.
    pub exact_total: S,
    /// Sum over horizons of whole units started, i.e. each horizon's time rounded up.
    pub billed_total: u64,
    /// Horizons in the order they were granted time.
    pub visits: Vec<usize>,
}

impl<S: Budget> SimOutcome<S> {
    pub fn billed(&self, horizon: usize) -> u64 {
        self.spent.get(&horizon).map_or(0, Budget::ceil_units)
    }
}

pub fn simulate<S: Budget>(cfg: ScheduleConfig<S>, profile: &CostProfile<S>, max_ticks: usize) -> SimOutcome<S> {
    let mut sched = Scheduler::new(cfg);
    let mut spent: BTreeMap<usize, S> = BTreeMap::new();
    let mut visits = Vec::new();
    let mut found = None;
    for _ in 0..max_ticks {
        match sched.next() {
            Tick::Run { horizon, budget } => {
                let (verdict, cost) = profile.cost(horizon);
                let so_far = spent.entry(horizon).or_insert_with(S::zero);
                let remaining = cost - so_far.clone();
                let (used, v) = match budget {
                    Some(b) if b < remaining => (b, Verdict::Unknown),
                    _ => (remaining, verdict),
                };
                *so_far = so_far.clone() + used.clone();
                if visits.last() != Some(&horizon) {
                    visits.push(horizon);
                }
                sched.report(horizon, used, v);
            }
            Tick::Solved { horizon } => {
                found = Some(horizon);
                break;
            }
            Tick::Exhausted => break,
        }
    }
    let exact_total = spent.values().cloned().fold(S::zero(), |a, b| a + b);
    let billed_total = spent.values().map(Budget::ceil_units).sum();
    SimOutcome { found, spent, exact_total, billed_total, visits }
}

/// Configuration used for the worked example: increment 1, slices of 1/100
/// unit, threshold of one unit.
pub fn reference_config(algorithm: Algorithm<Exact>) -> ScheduleConfig<Exact> {
    ScheduleConfig { algorithm, increment: 1, slice: q(1, 100), threshold: q(1, 1), horizon_cap: Some(64) }
}
