//! The multishot driver: one engine, one growing encoding, a scheduler
//! deciding which horizon to probe next and for how many conflicts.

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use stepwise_core::{
    check_relaxed, exists_non_ready, relaxed_non_ready, validate_plan, ActionId, FluentId, ModelError, State, StepPlan, Task, ValueId,
    ValidationReport,
};
use stepwise_engine::{Engine, Lit, Status, Var};
use thiserror::Error;

use crate::encoder::{EncodeError, HorizonEncoding, Mode};
use crate::schedule::{Algorithm, Budget, ScheduleConfig, Scheduler, Tick, Verdict};

/// What a guess-and-check mode does with a rejected model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GcStrategy {
    /// Add forall-step interference to the whole encoding and keep going.
    SwitchToForall,
    /// Forbid the offending step assignment and resolve.
    Nogood,
}

impl GcStrategy {
    pub fn default_for(mode: Mode) -> Self {
        match mode {
            Mode::GcExists => GcStrategy::SwitchToForall,
            _ => GcStrategy::Nogood,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    pub mode: Mode,
    pub algorithm: Algorithm<f64>,
    pub heuristic: bool,
    pub increment: usize,
    /// Conflicts per slice under `A` and `B`; also `B`'s run threshold.
    pub slice: u64,
    pub seed: u64,
    pub horizon_cap: Option<usize>,
    pub gc_strategy: GcStrategy,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            mode: Mode::ExistsAcyc,
            algorithm: Algorithm::B { gamma: 0.9 },
            heuristic: false,
            increment: 5,
            slice: 512,
            seed: 0,
            horizon_cap: Some(200),
            gc_strategy: GcStrategy::SwitchToForall,
        }
    }
}

impl PlannerConfig {
    pub fn new(mode: Mode, algorithm: Algorithm<f64>) -> Self {
        Self { mode, algorithm, gc_strategy: GcStrategy::default_for(mode), ..Self::default() }
    }

    fn check(&self) -> Result<(), PlanError> {
        let bad = |msg: &str| Err(PlanError::Config(msg.to_string()));
        match self.algorithm {
            Algorithm::A { n } if n == 0 => return bad("A(n) needs n >= 1"),
            Algorithm::B { gamma } if !(gamma > 0.0 && gamma < 1.0) => return bad("B(gamma) needs 0 < gamma < 1"),
            _ => {}
        }
        if self.increment == 0 {
            return bad("increment must be positive");
        }
        if self.slice == 0 {
            return bad("slice must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    /// The engine produced a model whose plan the validator rejects; a bug.
    #[error("extracted plan failed validation: {0}")]
    Unsound(ValidationReport),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorizonStat {
    pub horizon: usize,
    pub conflicts: u64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default)]
pub struct PlanStats {
    /// One entry per horizon in first-visit order, with its final verdict.
    pub horizons: Vec<HorizonStat>,
    pub solve_calls: u64,
    pub nogoods: u64,
    pub switched_to_forall: bool,
    pub plan_length: Option<usize>,
    pub wall_time: Duration,
}

impl PlanStats {
    fn charge(&mut self, horizon: usize, conflicts: u64, verdict: Verdict) {
        match self.horizons.iter_mut().find(|h| h.horizon == horizon) {
            Some(h) => {
                h.conflicts += conflicts;
                h.verdict = verdict;
            }
            None => self.horizons.push(HorizonStat { horizon, conflicts, verdict }),
        }
    }

    pub fn total_conflicts(&self) -> u64 {
        self.horizons.iter().map(|h| h.conflicts).sum()
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Sat => "sat",
        Verdict::Unsat => "unsat",
        Verdict::Unknown => "unknown",
    }
}

/// `key=value` lines.
impl fmt::Display for PlanStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "horizons_tried={}", self.horizons.len())?;
        for h in &self.horizons {
            writeln!(f, "horizon.{}.conflicts={}", h.horizon, h.conflicts)?;
            writeln!(f, "horizon.{}.verdict={}", h.horizon, verdict_str(h.verdict))?;
        }
        writeln!(f, "solve_calls={}", self.solve_calls)?;
        writeln!(f, "conflicts={}", self.total_conflicts())?;
        writeln!(f, "nogoods={}", self.nogoods)?;
        writeln!(f, "switched_to_forall={}", self.switched_to_forall)?;
        match self.plan_length {
            Some(n) => writeln!(f, "plan_length={n}")?,
            None => writeln!(f, "plan_length=none")?,
        }
        writeln!(f, "wall_time_ms={}", self.wall_time.as_millis())
    }
}

#[derive(Clone, Debug)]
pub enum PlanOutcome {
    Found { plan: StepPlan, sequence: Vec<ActionId> },
    /// Every horizon up to the cap is unsatisfiable.
    Exhausted { cap: usize },
}

#[derive(Clone, Debug)]
pub struct PlanResult {
    pub outcome: PlanOutcome,
    pub stats: PlanStats,
}

impl PlanResult {
    pub fn plan(&self) -> Option<&StepPlan> {
        match &self.outcome {
            PlanOutcome::Found { plan, .. } => Some(plan),
            PlanOutcome::Exhausted { .. } => None,
        }
    }
}

/// One rejected step of a guess-and-check model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFailure {
    /// 1-based.
    pub step: usize,
    /// State the step starts from.
    pub state: State,
    pub actions: Vec<ActionId>,
    /// Members the fixpoint could not apply.
    pub non_ready: Vec<ActionId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GcVerdict {
    Accept,
    Reject(Vec<StepFailure>),
}

/// Runs the fixpoint checker matching `mode` over every step of `plan`.
///
/// Steps are followed by parallel update, which is what the encoding's
/// frame and effect clauses enforce, so failures are reported for every
/// step rather than only the first.
pub fn guess_and_check_round(task: &Task, plan: &StepPlan, mode: Mode) -> GcVerdict {
    let mut state = task.init().clone();
    let mut failures = Vec::new();
    for (i, step) in plan.steps().iter().enumerate() {
        let non_ready = match mode {
            Mode::GcRelaxed => relaxed_non_ready(task, &state, step),
            _ => exists_non_ready(task, &state, step),
        };
        if !non_ready.is_empty() {
            failures.push(StepFailure { step: i + 1, state: state.clone(), actions: step.clone(), non_ready });
        }
        state = task.parallel_update(&state, step);
    }
    if failures.is_empty() {
        GcVerdict::Accept
    } else {
        GcVerdict::Reject(failures)
    }
}

/// A clause that excludes one kind of step failure. It does not depend on
/// the step, so it is instantiated at every step of the encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nogood {
    /// Members that must not all occur.
    pub together: Vec<ActionId>,
    /// Any one of these occurring lifts the nogood.
    pub unless_any: Vec<ActionId>,
    /// Lifted when the preceding state differs on one of these.
    pub state: Vec<(FluentId, ValueId)>,
}

impl Nogood {
    /// Exists-step: the non-ready members always contain an invalidation
    /// cycle, which no state or superset can repair.
    /// Relaxed: a failing core stays failing in every superset that adds no
    /// writer of a fluent the core reads, from any state that agrees on the
    /// fluents the failure depends on.
    pub fn from_failure(task: &Task, mode: Mode, f: &StepFailure) -> Self {
        if mode != Mode::GcRelaxed {
            return Self { together: f.non_ready.clone(), unless_any: Vec::new(), state: Vec::new() };
        }
        let core = relaxed_core(task, &f.state, &f.actions);
        let mut read: Vec<FluentId> =
            core.iter().flat_map(|&a| task.actions()[a.index()].pre.iter().map(|(x, _)| x)).collect();
        read.sort();
        read.dedup();
        let unless_any = task
            .action_ids()
            .filter(|b| !core.contains(b))
            .filter(|b| task.actions()[b.index()].post.iter().any(|(x, _)| read.binary_search(&x).is_ok()))
            .collect();
        let state = pinned_fluents(task, &f.state, &core, &read).into_iter().map(|x| (x, f.state.get(x))).collect();
        Self { together: core, unless_any, state }
    }

    /// The clause at step `t >= 1`.
    pub fn clause(&self, enc: &HorizonEncoding, t: usize) -> Vec<Lit> {
        let mut lits: Vec<Lit> = self.together.iter().map(|&a| enc.occurs(a, t).neg()).collect();
        lits.extend(self.unless_any.iter().map(|&b| enc.occurs(b, t).pos()));
        lits.extend(self.state.iter().map(|&(x, v)| enc.holds(x, v, t - 1).neg()));
        lits
    }
}

/// Clause excluding one step failure at its own step.
pub fn nogood(task: &Task, enc: &HorizonEncoding, mode: Mode, f: &StepFailure) -> Vec<Lit> {
    Nogood::from_failure(task, mode, f).clause(enc, f.step)
}

/// Greedily drops members of a relaxed-failing set while it keeps failing.
/// A member is only dropped when it writes nothing the rest reads, so the
/// dropped ones never appear positively in the nogood and the current
/// model is always cut.
fn relaxed_core(task: &Task, s: &State, set: &[ActionId]) -> Vec<ActionId> {
    let writes_read = |b: ActionId, rest: &[ActionId]| {
        task.actions()[b.index()].post.iter().any(|(x, _)| {
            rest.iter().any(|&a| task.actions()[a.index()].pre.iter().any(|(y, _)| y == x))
        })
    };
    let mut core = set.to_vec();
    let mut i = 0;
    while i < core.len() {
        let mut smaller = core.clone();
        let b = smaller.remove(i);
        if !smaller.is_empty() && !writes_read(b, &smaller) && !check_relaxed(task, s, &smaller).0 {
            core = smaller;
        } else {
            i += 1;
        }
    }
    core
}

/// Fluents among `read` whose current value the failure depends on.
///
/// A fluent is freed when the core fails for every joint value of the freed
/// fluents, the rest staying as in `s`. The enumeration is capped, so this
/// only ever frees a handful.
fn pinned_fluents(task: &Task, s: &State, core: &[ActionId], read: &[FluentId]) -> Vec<FluentId> {
    const MAX_ASSIGNMENTS: usize = 64;
    let mut free: Vec<FluentId> = Vec::new();
    let mut pinned = Vec::new();
    for &x in read {
        let mut trial = free.clone();
        trial.push(x);
        let sizes: Vec<usize> = trial.iter().map(|&y| task.fluent(y).values.len()).collect();
        let total = sizes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n).filter(|&p| p <= MAX_ASSIGNMENTS));
        let always_fails = total.is_some_and(|total| {
            (0..total).all(|mut code| {
                let mut st = s.clone();
                for (&y, &n) in trial.iter().zip(&sizes) {
                    st.set(y, ValueId((code % n) as u32));
                    code /= n;
                }
                !check_relaxed(task, &st, core).0
            })
        });
        if always_fails {
            free = trial;
        } else {
            pinned.push(x);
        }
    }
    pinned
}

/// Every precondition of a member holds before the step or is written by
/// another member. Each relaxed-serializable step satisfies this, so adding
/// it only prunes candidates the check would reject.
fn add_relaxed_support(engine: &mut Engine, task: &Task, enc: &HorizonEncoding, from: usize, to: usize) -> Result<(), EncodeError> {
    for t in from.max(1)..=to {
        for a in task.action_ids() {
            for (x, v) in task.actions()[a.index()].pre.iter() {
                let mut clause = vec![enc.occurs(a, t).neg(), enc.holds(x, v, t - 1).pos()];
                clause.extend(
                    task.action_ids()
                        .filter(|&b| b != a && task.actions()[b.index()].post.get(x) == Some(v))
                        .map(|b| enc.occurs(b, t).pos()),
                );
                engine.add_clause(&clause)?;
            }
        }
    }
    Ok(())
}

/// Hint level for variables of step `t`: earlier steps are decided first.
pub fn heuristic_level(t: usize) -> i64 {
    i64::from(i32::MAX) - t as i64
}

/// Watches `holds(x,v,t)` for `t` in `from..=to` (skipping 0): whatever
/// value it gets, `holds(x,v,t-1)` is hinted towards the same value at
/// level `2147483647 - t`.
pub fn attach_heuristic(
    engine: &mut Engine,
    task: &Task,
    enc: &HorizonEncoding,
    from: usize,
    to: usize,
) -> Result<(), EncodeError> {
    let mut prev: HashMap<Var, (Var, i64)> = HashMap::new();
    for t in from.max(1)..=to {
        for f in task.fluent_ids() {
            for v in 0..task.fluent(f).values.len() as u32 {
                let v = ValueId(v);
                prev.insert(enc.holds(f, v, t), (enc.holds(f, v, t - 1), heuristic_level(t)));
            }
        }
    }
    if prev.is_empty() {
        return Ok(());
    }
    let mut vars: Vec<Var> = prev.keys().copied().collect();
    vars.sort();
    engine.on_assign(&vars, move |lit, sink| {
        if let Some(&(p, level)) = prev.get(&lit.var()) {
            sink.set_hint(p, level, Some(lit.is_positive()));
        }
    })?;
    Ok(())
}

struct Context<'a> {
    task: &'a Task,
    cfg: &'a PlannerConfig,
    engine: Engine,
    enc: HorizonEncoding,
    stats: PlanStats,
    nogoods: Vec<Nogood>,
}

impl Context<'_> {
    fn extend(&mut self, horizon: usize) -> Result<(), PlanError> {
        let old = self.enc.max_step();
        if horizon <= old {
            return Ok(());
        }
        self.enc.extend_to(self.task, &mut self.engine, horizon)?;
        if self.cfg.mode == Mode::GcRelaxed {
            add_relaxed_support(&mut self.engine, self.task, &self.enc, old + 1, horizon)?;
        }
        for ng in &self.nogoods {
            for t in old + 1..=horizon {
                self.engine.add_clause(&ng.clause(&self.enc, t)).map_err(EncodeError::from)?;
            }
        }
        if self.cfg.heuristic {
            attach_heuristic(&mut self.engine, self.task, &self.enc, old + 1, horizon)?;
        }
        Ok(())
    }

    /// Works on `horizon` for at most `budget` conflicts. Guess-and-check
    /// refinements happen inside the same grant.
    fn probe(&mut self, horizon: usize, budget: Option<u64>) -> Result<(Verdict, u64, Option<StepPlan>), PlanError> {
        self.extend(horizon)?;
        let assumptions = self.enc.query_assumptions(horizon)?;
        let mut used = 0u64;
        loop {
            let left = budget.map(|b| b.saturating_sub(used).max(1));
            let out = self.engine.solve(&assumptions, left);
            self.stats.solve_calls += 1;
            used += out.stats.conflicts;
            match out.status {
                Status::Unsat => return Ok((Verdict::Unsat, used, None)),
                Status::BudgetExhausted => return Ok((Verdict::Unknown, used, None)),
                Status::Sat => {}
            }
            let model = out.model.expect("satisfiable call carries a model");
            let plan = self.enc.extract_plan(&model, horizon);
            let mode = self.cfg.mode;
            if !matches!(mode, Mode::GcExists | Mode::GcRelaxed) {
                return Ok((Verdict::Sat, used, Some(plan)));
            }
            let failures = match guess_and_check_round(self.task, &plan, mode) {
                GcVerdict::Accept => return Ok((Verdict::Sat, used, Some(plan))),
                GcVerdict::Reject(f) => f,
            };
            if mode == Mode::GcExists && self.cfg.gc_strategy == GcStrategy::SwitchToForall {
                self.enc.add_forall_block(self.task, &mut self.engine)?;
                self.stats.switched_to_forall = true;
            } else {
                for f in &failures {
                    let ng = Nogood::from_failure(self.task, mode, f);
                    for t in 1..=self.enc.max_step() {
                        self.engine.add_clause(&ng.clause(&self.enc, t)).map_err(EncodeError::from)?;
                    }
                    self.nogoods.push(ng);
                    self.stats.nogoods += 1;
                }
            }
            if budget.is_some_and(|b| used >= b) {
                return Ok((Verdict::Unknown, used, None));
            }
        }
    }
}

/// Searches horizons until one yields a plan the validator accepts.
pub fn plan(task: &Task, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
    cfg.check()?;
    let start = Instant::now();
    let mut engine = Engine::with_seed(cfg.seed);
    let enc = HorizonEncoding::new(task, &mut engine, cfg.mode)?;
    let slice = cfg.slice as f64;
    let mut sched = Scheduler::new(ScheduleConfig {
        algorithm: cfg.algorithm.clone(),
        increment: cfg.increment,
        slice,
        threshold: slice,
        horizon_cap: cfg.horizon_cap,
    });
    let mut ctx = Context { task, cfg, engine, enc, stats: PlanStats::default(), nogoods: Vec::new() };
    if cfg.heuristic {
        attach_heuristic(&mut ctx.engine, task, &ctx.enc, 0, 0)?;
    }
    let mut found: Option<StepPlan> = None;
    loop {
        match sched.next() {
            Tick::Run { horizon, budget } => {
                let grant = budget.map(|b| b.ceil_units().max(1));
                let (verdict, used, plan) = ctx.probe(horizon, grant)?;
                ctx.stats.charge(horizon, used, verdict);
                if plan.is_some() {
                    found = plan;
                }
                sched.report(horizon, used as f64, verdict);
            }
            Tick::Solved { .. } => break,
            Tick::Exhausted => break,
        }
    }
    let mut stats = ctx.stats;
    stats.wall_time = start.elapsed();
    let outcome = match found {
        Some(plan) => match validate_plan(task, &plan)? {
            // Trailing idle steps only pad the horizon.
            ValidationReport::Valid { sequence } => {
                let mut steps = plan.steps().to_vec();
                while steps.last().is_some_and(Vec::is_empty) {
                    steps.pop();
                }
                let plan = StepPlan::new(steps, plan.semantics())?;
                stats.plan_length = Some(plan.len());
                PlanOutcome::Found { plan, sequence }
            }
            report => return Err(PlanError::Unsound(report)),
        },
        None => PlanOutcome::Exhausted { cap: cfg.horizon_cap.unwrap_or(0) },
    };
    Ok(PlanResult { outcome, stats })
}
