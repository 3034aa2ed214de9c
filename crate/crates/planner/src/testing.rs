//! Encoding-level property checks shared by the planner's tests and the
//! acceptance harness. Each returns `Err` with a description of the first
//! violation found.

use rand::Rng;

use stepwise_core::testing::{random_walk_plan, retarget};
use stepwise_core::{validate_plan, StepPlan, Task};
use stepwise_engine::{Engine, Lit, Status};

use crate::encoder::{HorizonEncoding, Mode};
use crate::planner::{attach_heuristic, guess_and_check_round, plan, GcStrategy, GcVerdict, PlannerConfig};
use crate::schedule::Algorithm;

/// Modes whose every model is a plan under the mode's semantics.
pub const COMPLETE_MODES: [Mode; 3] = [Mode::Seq, Mode::Forall, Mode::ExistsAcyc];

/// Models enumerated per mode and horizon before giving up on "every".
pub const MODEL_LIMIT: usize = 24;

fn fresh(task: &Task, mode: Mode, n: usize, seed: u64) -> (Engine, HorizonEncoding) {
    let mut engine = Engine::with_seed(seed);
    let mut enc = HorizonEncoding::new(task, &mut engine, mode).expect("encoding a built task");
    enc.extend_to(task, &mut engine, n).expect("extending a built task");
    (engine, enc)
}

/// Clause forbidding the occurrences of `plan` at steps `1..=plan.len()`.
fn block(enc: &HorizonEncoding, plan: &StepPlan) -> Vec<Lit> {
    enc.plan_assumptions(plan).into_iter().map(|l| !l).collect()
}

/// Counts of what [`round_trip`] looked at.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundTrip {
    pub models: usize,
    pub injected: usize,
}

/// Models to plans, and valid plans back to models, for every mode and
/// every horizon up to `max_h`.
///
/// Complete modes: each model's plan validates. Guess-and-check modes: each
/// model accepted by the round checker validates. All modes: a random valid
/// plan pinned by assumptions is satisfiable.
pub fn round_trip<R: Rng>(rng: &mut R, task: &Task, max_h: usize) -> Result<RoundTrip, String> {
    let mut seen = RoundTrip::default();
    for mode in Mode::ALL {
        for m in 0..=max_h {
            let (mut engine, enc) = fresh(task, mode, m, 0);
            let q = enc.query_assumptions(m).map_err(|e| e.to_string())?;
            for _ in 0..MODEL_LIMIT {
                let out = engine.solve(&q, None);
                let Some(model) = out.model else { break };
                let plan = enc.extract_plan(&model, m);
                seen.models += 1;
                let checked = COMPLETE_MODES.contains(&mode)
                    || guess_and_check_round(task, &plan, mode) == GcVerdict::Accept;
                if checked {
                    let report = validate_plan(task, &plan).map_err(|e| e.to_string())?;
                    if !report.is_valid() {
                        return Err(format!("{mode} h={m}: model plan {:?} rejected: {report}", plan.steps()));
                    }
                }
                if engine.add_clause(&block(&enc, &plan)).is_err() || !engine.is_ok() {
                    break;
                }
            }
        }
    }
    for mode in Mode::ALL {
        for m in 0..=max_h {
            let (walk, end) = random_walk_plan(rng, task, m, mode.semantics());
            let goal: Vec<_> = task.fluent_ids().filter(|_| rng.gen_bool(0.5)).map(|f| (f, end.get(f))).collect();
            let target = retarget(task, &goal);
            if !validate_plan(&target, &walk).map_err(|e| e.to_string())?.is_valid() {
                return Err(format!("{mode} h={m}: random walk {:?} does not validate", walk.steps()));
            }
            let (mut engine, enc) = fresh(&target, mode, m, 0);
            let mut lits = enc.query_assumptions(m).map_err(|e| e.to_string())?;
            lits.extend(enc.plan_assumptions(&walk));
            seen.injected += 1;
            let out = engine.solve(&lits, None);
            if out.status != Status::Sat {
                return Err(format!("{mode} h={m}: valid plan {:?} pinned gives {:?}", walk.steps(), out.status));
            }
        }
    }
    Ok(seen)
}

/// `query(m)` has the same verdict whether the encoding stops at `m` or
/// runs on to `m + 5`, and on one context solved horizon after horizon.
pub fn multishot(task: &Task, max_h: usize) -> Result<(), String> {
    for mode in Mode::ALL {
        let (mut grown, genc) = fresh(task, mode, max_h + 5, 1);
        for m in 0..=max_h {
            let (mut short, senc) = fresh(task, mode, m, 1);
            let (mut long, lenc) = fresh(task, mode, m + 5, 1);
            let a = short.solve(&senc.query_assumptions(m).unwrap(), None).status;
            let b = long.solve(&lenc.query_assumptions(m).unwrap(), None).status;
            let c = grown.solve(&genc.query_assumptions(m).unwrap(), None).status;
            if a != b || a != c {
                return Err(format!("{mode} query({m}): n=m {a:?}, n=m+5 {b:?}, shared context {c:?}"));
            }
        }
    }
    Ok(())
}

/// Hints change neither raw verdicts nor the planner's outcome.
pub fn heuristic_neutral(task: &Task, max_h: usize, seed: u64) -> Result<(), String> {
    for mode in Mode::ALL {
        let (mut plain, penc) = fresh(task, mode, max_h, seed);
        let (mut hinted, henc) = fresh(task, mode, max_h, seed);
        attach_heuristic(&mut hinted, task, &henc, 0, max_h).map_err(|e| e.to_string())?;
        for m in 0..=max_h {
            let a = plain.solve(&penc.query_assumptions(m).unwrap(), None);
            let b = hinted.solve(&henc.query_assumptions(m).unwrap(), None);
            if a.status != b.status {
                return Err(format!("{mode} query({m}): {:?} without hints, {:?} with", a.status, b.status));
            }
            if let Some(model) = b.model {
                if COMPLETE_MODES.contains(&mode) {
                    let p = henc.extract_plan(&model, m);
                    if !validate_plan(task, &p).map_err(|e| e.to_string())?.is_valid() {
                        return Err(format!("{mode} query({m}): hinted model plan invalid"));
                    }
                }
            }
        }
        // Switching to forall-step depends on which model comes first, so only
        // the nogood strategy has a model-independent minimal horizon.
        let cfg = |heuristic| PlannerConfig {
            heuristic,
            increment: 1,
            horizon_cap: Some(max_h),
            seed,
            gc_strategy: GcStrategy::Nogood,
            ..PlannerConfig::new(mode, Algorithm::S)
        };
        let off = plan(task, &cfg(false)).map_err(|e| e.to_string())?;
        let on = plan(task, &cfg(true)).map_err(|e| e.to_string())?;
        let len = |r: &crate::planner::PlanResult| r.plan().map(StepPlan::len);
        if len(&off) != len(&on) {
            return Err(format!("{mode}: plan length {:?} without hints, {:?} with", len(&off), len(&on)));
        }
    }
    Ok(())
}
