//! Random task generators shared by property tests across the workspace.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{ActionId, FluentId, Semantics, State, Task, TaskBuilder, ValueId};
use crate::plan::StepPlan;
use crate::serial::{check_exists, check_forall, check_relaxed};

#[derive(Clone, Copy, Debug)]
pub struct TaskShape {
    pub max_fluents: usize,
    pub max_domain: usize,
    pub max_actions: usize,
    /// Upper bound on bindings per precondition and per postcondition.
    pub max_conditions: usize,
    pub max_goals: usize,
}

impl Default for TaskShape {
    fn default() -> Self {
        Self { max_fluents: 5, max_domain: 3, max_actions: 6, max_conditions: 2, max_goals: 2 }
    }
}

fn pick_bindings<R: Rng>(rng: &mut R, domains: &[usize], count: usize) -> Vec<(FluentId, ValueId)> {
    let mut fl: Vec<usize> = (0..domains.len()).collect();
    fl.shuffle(rng);
    fl.truncate(count.min(domains.len()));
    fl.sort();
    fl.into_iter()
        .map(|f| (FluentId(f as u32), ValueId(rng.gen_range(0..domains[f]) as u32)))
        .collect()
}

pub fn random_task<R: Rng>(rng: &mut R, shape: TaskShape) -> Task {
    let n = rng.gen_range(1..=shape.max_fluents);
    let domains: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=shape.max_domain.max(2))).collect();
    let mut b = TaskBuilder::new();
    for (i, &d) in domains.iter().enumerate() {
        let f = b.add_fluent(format!("f{i}"), (0..d).map(|v| v.to_string())).unwrap();
        b.set_init(f, ValueId(rng.gen_range(0..d) as u32)).unwrap();
    }
    let goals = rng.gen_range(0..=shape.max_goals);
    for (f, v) in pick_bindings(rng, &domains, goals) {
        b.add_goal(f, v).unwrap();
    }
    let m = rng.gen_range(1..=shape.max_actions);
    for i in 0..m {
        let pre_n = rng.gen_range(0..=shape.max_conditions);
        let post_n = rng.gen_range(1..=shape.max_conditions.max(1));
        let pre = pick_bindings(rng, &domains, pre_n);
        let post = pick_bindings(rng, &domains, post_n);
        b.add_action(format!("o{i}"), pre, post).unwrap();
    }
    b.build().unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, task: &Task) -> State {
    State::from_values(
        task.fluents()
            .iter()
            .map(|f| ValueId(rng.gen_range(0..f.values.len()) as u32))
            .collect(),
    )
}

/// Random subset of the actions, greedily thinned to a confluent set.
pub fn random_confluent_set<R: Rng>(rng: &mut R, task: &Task, max: usize) -> Vec<ActionId> {
    let mut all: Vec<ActionId> = task.action_ids().collect();
    all.shuffle(rng);
    let target = rng.gen_range(0..=max.min(all.len()));
    let mut set: Vec<ActionId> = Vec::new();
    for a in all {
        if set.len() == target {
            break;
        }
        set.push(a);
        if !task.is_confluent(&set) {
            set.pop();
        }
    }
    set.sort();
    set
}

/// Copy of `task` with its goal replaced.
pub fn retarget(task: &Task, goal: &[(FluentId, ValueId)]) -> Task {
    let mut b = TaskBuilder::new();
    for f in task.fluent_ids() {
        let fl = task.fluent(f);
        b.add_fluent(fl.name.clone(), fl.values.iter().cloned()).unwrap();
        b.set_init(f, task.init().get(f)).unwrap();
    }
    for &(f, v) in goal {
        b.add_goal(f, v).unwrap();
    }
    for a in task.actions() {
        b.add_action(a.name.clone(), a.pre.as_slice().to_vec(), a.post.as_slice().to_vec()).unwrap();
    }
    for g in task.mutex_groups() {
        b.add_mutex_group(g.clone()).unwrap();
    }
    b.build().unwrap()
}

fn step_ok(task: &Task, s: &State, set: &[ActionId], semantics: Semantics) -> bool {
    match semantics {
        Semantics::Sequential => set.len() <= 1 && check_forall(task, s, set),
        Semantics::Forall => check_forall(task, s, set),
        Semantics::Exists => check_exists(task, s, set).0,
        Semantics::Relaxed => check_relaxed(task, s, set).0,
    }
}

/// Plan of exactly `len` steps, each valid under `semantics` from the state
/// the previous ones reach; steps that found nothing in a few tries stay idle.
/// Also returns the final state.
pub fn random_walk_plan<R: Rng>(rng: &mut R, task: &Task, len: usize, semantics: Semantics) -> (StepPlan, State) {
    let max = if semantics == Semantics::Sequential { 1 } else { task.actions().len() };
    let mut s = task.init().clone();
    let mut steps = Vec::with_capacity(len);
    for _ in 0..len {
        let mut chosen = Vec::new();
        for _ in 0..8 {
            let set = random_confluent_set(rng, task, max);
            if !set.is_empty() && step_ok(task, &s, &set, semantics) {
                chosen = set;
                break;
            }
        }
        s = task.parallel_update(&s, &chosen);
        steps.push(chosen);
    }
    (StepPlan::new(steps, semantics).unwrap(), s)
}
