//! Horizon scheduling: which horizon to work on next, and for how long.
//!
//! * `S` runs the smallest open horizon to completion.
//! * `A(n)` works in rounds over the `n` smallest open horizons, one slice each.
//! * `B(γ)` ties horizon `h_min + i·inc` to `t·γ^i`, where `t` is the time
//!   spent on the smallest open horizon `h_min`; a horizon only runs once its
//!   share reaches the threshold, and the one furthest behind its share goes next.

use std::collections::VecDeque;
use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

/// Scalar used to measure time; `f64` for conflicts, exact rationals for simulation.
pub trait Budget: Num + Clone + PartialOrd + Debug + ToPrimitive {
    /// Smallest whole number of units covering `self`.
    fn ceil_units(&self) -> u64;
}

impl Budget for f64 {
    fn ceil_units(&self) -> u64 {
        self.ceil().max(0.0) as u64
    }
}

impl Budget for Ratio<i128> {
    fn ceil_units(&self) -> u64 {
        self.ceil().to_integer().max(0) as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm<S> {
    S,
    A { n: usize },
    B { gamma: S },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleConfig<S> {
    pub algorithm: Algorithm<S>,
    /// Distance between consecutive horizons.
    pub increment: usize,
    /// Time granted per turn under `A` and `B`.
    pub slice: S,
    /// Share a horizon needs under `B` before it runs at all.
    pub threshold: S,
    /// Largest horizon ever tried.
    pub horizon_cap: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HorizonStatus {
    Pending,
    Running,
    Unsat,
    Sat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    /// Budget ran out without a verdict.
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tick<S> {
    /// Work on `horizon` for at most `budget` (unbounded when `None`).
    Run { horizon: usize, budget: Option<S> },
    Solved { horizon: usize },
    /// Every horizon up to the cap is unsatisfiable.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry<S> {
    pub status: HorizonStatus,
    pub spent: S,
}

#[derive(Clone, Debug)]
pub struct Scheduler<S: Budget> {
    cfg: ScheduleConfig<S>,
    entries: Vec<Entry<S>>,
    round: VecDeque<usize>,
    solved: Option<usize>,
}

impl<S: Budget> Scheduler<S> {
    pub fn new(cfg: ScheduleConfig<S>) -> Self {
        assert!(cfg.increment >= 1, "increment must be positive");
        if let Algorithm::A { n } = cfg.algorithm {
            assert!(n >= 1, "A(n) needs n >= 1");
        }
        Self { cfg, entries: Vec::new(), round: VecDeque::new(), solved: None }
    }

    pub fn config(&self) -> &ScheduleConfig<S> {
        &self.cfg
    }

    fn horizon(&self, k: usize) -> usize {
        k * self.cfg.increment
    }

    fn max_index(&self) -> Option<usize> {
        self.cfg.horizon_cap.map(|c| c / self.cfg.increment)
    }

    fn entry(&mut self, k: usize) -> &mut Entry<S> {
        while self.entries.len() <= k {
            self.entries.push(Entry { status: HorizonStatus::Pending, spent: S::zero() });
        }
        &mut self.entries[k]
    }

    fn open(&self, k: usize) -> bool {
        self.entries.get(k).map_or(true, |e| e.status != HorizonStatus::Unsat)
    }

    fn within_cap(&self, k: usize) -> bool {
        self.max_index().map_or(true, |m| k <= m)
    }

    /// The `count` smallest horizons (as indices) not yet proven unsatisfiable.
    fn smallest_open(&self, count: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(count);
        let mut k = 0;
        while out.len() < count && self.within_cap(k) {
            if self.open(k) {
                out.push(k);
            }
            k += 1;
        }
        out
    }

    pub fn next(&mut self) -> Tick<S> {
        if let Some(h) = self.solved {
            return Tick::Solved { horizon: h };
        }
        let k = match self.cfg.algorithm.clone() {
            Algorithm::S => match self.smallest_open(1).first() {
                Some(&k) => {
                    self.entry(k).status = HorizonStatus::Running;
                    return Tick::Run { horizon: self.horizon(k), budget: None };
                }
                None => return Tick::Exhausted,
            },
            Algorithm::A { n } => {
                while let Some(&k) = self.round.front() {
                    if self.open(k) {
                        break;
                    }
                    self.round.pop_front();
                }
                if self.round.is_empty() {
                    self.round = self.smallest_open(n).into();
                }
                match self.round.pop_front() {
                    Some(k) => k,
                    None => return Tick::Exhausted,
                }
            }
            Algorithm::B { gamma } => match self.smallest_open(1).first() {
                Some(&hmin) => {
                    let (k, budget) = self.pick_geometric(hmin, &gamma);
                    self.entry(k).status = HorizonStatus::Running;
                    return Tick::Run { horizon: self.horizon(k), budget: Some(budget) };
                }
                None => return Tick::Exhausted,
            },
        };
        self.entry(k).status = HorizonStatus::Running;
        Tick::Run { horizon: self.horizon(k), budget: Some(self.cfg.slice.clone()) }
    }

    /// Horizon furthest behind its share, granted at most what it lacks;
    /// `h_min` itself when everyone is on track.
    fn pick_geometric(&mut self, hmin: usize, gamma: &S) -> (usize, S) {
        let t = self.entry(hmin).spent.clone();
        let mut share = t;
        let mut best: Option<(usize, S)> = None;
        let mut k = hmin;
        loop {
            k += 1;
            share = share * gamma.clone();
            if !self.within_cap(k) || share < self.cfg.threshold {
                break;
            }
            if !self.open(k) {
                continue;
            }
            let deficit = share.clone() - self.entry(k).spent.clone();
            if deficit > S::zero() && best.as_ref().map_or(true, |(_, d)| deficit > *d) {
                best = Some((k, deficit));
            }
        }
        match best {
            Some((k, deficit)) if deficit < self.cfg.slice => (k, deficit),
            Some((k, _)) => (k, self.cfg.slice.clone()),
            None => (hmin, self.cfg.slice.clone()),
        }
    }

    /// Records the outcome of the last `Run` on `horizon`.
    pub fn report(&mut self, horizon: usize, spent: S, verdict: Verdict) {
        debug_assert_eq!(horizon % self.cfg.increment, 0);
        let k = horizon / self.cfg.increment;
        let e = self.entry(k);
        e.spent = e.spent.clone() + spent;
        e.status = match verdict {
            Verdict::Sat => HorizonStatus::Sat,
            Verdict::Unsat => HorizonStatus::Unsat,
            Verdict::Unknown => HorizonStatus::Running,
        };
        if verdict == Verdict::Sat && self.solved.is_none() {
            self.solved = Some(horizon);
        }
    }

    /// `(horizon, entry)` for every horizon touched so far.
    pub fn ledger(&self) -> Vec<(usize, Entry<S>)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.status != HorizonStatus::Pending || e.spent != S::zero())
            .map(|(k, e)| (self.horizon(k), e.clone()))
            .collect()
    }

    pub fn spent(&self, horizon: usize) -> S {
        self.entries
            .get(horizon / self.cfg.increment)
            .map_or_else(S::zero, |e| e.spent.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(algorithm: Algorithm<f64>) -> ScheduleConfig<f64> {
        ScheduleConfig { algorithm, increment: 5, slice: 1.0, threshold: 1.0, horizon_cap: Some(20) }
    }

    #[test]
    fn s_probes_zero_then_steps_by_increment() {
        let mut s = Scheduler::new(cfg(Algorithm::S));
        let mut seen = Vec::new();
        loop {
            match s.next() {
                Tick::Run { horizon, budget } => {
                    assert_eq!(budget, None);
                    seen.push(horizon);
                    s.report(horizon, 1.0, Verdict::Unsat);
                }
                Tick::Exhausted => break,
                Tick::Solved { .. } => unreachable!(),
            }
        }
        assert_eq!(seen, vec![0, 5, 10, 15, 20]);
    }

    #[test]
    fn a_rotates_over_n_horizons() {
        let mut s = Scheduler::new(cfg(Algorithm::A { n: 3 }));
        let mut seen = Vec::new();
        for _ in 0..6 {
            if let Tick::Run { horizon, budget } = s.next() {
                assert_eq!(budget, Some(1.0));
                seen.push(horizon);
                s.report(horizon, 1.0, Verdict::Unknown);
            }
        }
        assert_eq!(seen, vec![0, 5, 10, 0, 5, 10]);
    }

    #[test]
    fn sat_terminates() {
        let mut s = Scheduler::new(cfg(Algorithm::B { gamma: 0.9 }));
        let Tick::Run { horizon, .. } = s.next() else { panic!() };
        s.report(horizon, 1.0, Verdict::Sat);
        assert_eq!(s.next(), Tick::Solved { horizon: 0 });
    }

    #[test]
    fn b_waits_for_threshold() {
        let mut s = Scheduler::new(cfg(Algorithm::B { gamma: 0.5 }));
        // Until h_min has two units, half of it stays below the threshold.
        for _ in 0..2 {
            assert_eq!(s.next(), Tick::Run { horizon: 0, budget: Some(1.0) });
            s.report(0, 1.0, Verdict::Unknown);
        }
        assert_eq!(s.next(), Tick::Run { horizon: 5, budget: Some(1.0) });
    }
}
