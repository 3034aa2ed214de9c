//! Serializability of parallel action sets and whole-plan validation.
//!
//! Edge `a -> b` in the invalidation graph means `a` changes a fluent that
//! `b` requires, so `b` has to run before `a` in any serialization.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::error::ModelError;
use crate::model::{ActionId, FluentId, Semantics, State, Task, ValueId};
use crate::plan::StepPlan;

/// Invalidation graph restricted to one action set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidationGraph {
    nodes: Vec<ActionId>,
    edges: Vec<(ActionId, ActionId)>,
}

impl InvalidationGraph {
    pub fn nodes(&self) -> &[ActionId] {
        &self.nodes
    }

    /// Deduplicated, sorted edges.
    pub fn edges(&self) -> &[(ActionId, ActionId)] {
        &self.edges
    }

    pub fn is_acyclic(&self) -> bool {
        self.serialization().is_some()
    }

    /// Order in which every invalidated action precedes its invalidator;
    /// smallest ordinal first among the available ones.
    pub fn serialization(&self) -> Option<Vec<ActionId>> {
        let pos = |a: ActionId| self.nodes.binary_search(&a).unwrap();
        // `a` may run once every action it invalidates has run.
        let mut pending = vec![0usize; self.nodes.len()];
        let mut waiting_on: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            pending[pos(a)] += 1;
            waiting_on[pos(b)].push(pos(a));
        }
        let mut ready: BTreeSet<usize> = (0..self.nodes.len()).filter(|&i| pending[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = ready.pop_first() {
            order.push(self.nodes[i]);
            for &j in &waiting_on[i] {
                pending[j] -= 1;
                if pending[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }
}

fn normalized(set: &[ActionId]) -> Vec<ActionId> {
    let mut v = set.to_vec();
    v.sort();
    v.dedup();
    v
}

/// `a` writes some fluent of `b`'s precondition to a different value.
fn invalidates(task: &Task, a: ActionId, b: ActionId) -> bool {
    let post = &task.actions()[a.index()].post;
    task.actions()[b.index()]
        .pre
        .iter()
        .any(|(x, v)| post.get(x).is_some_and(|w| w != v))
}

pub fn invalidation_graph(task: &Task, set: &[ActionId]) -> InvalidationGraph {
    let nodes = normalized(set);
    let mut edges = Vec::new();
    for &a in &nodes {
        for &b in &nodes {
            if a != b && invalidates(task, a, b) {
                edges.push((a, b));
            }
        }
    }
    InvalidationGraph { nodes, edges }
}

fn known(task: &Task, set: &[ActionId]) -> bool {
    set.iter().all(|a| a.index() < task.actions().len())
}

fn preconditions_hold(task: &Task, s: &State, set: &[ActionId]) -> bool {
    set.iter().all(|&a| task.actions()[a.index()].applicable(s))
}

/// Every ordering of `set` is executable from `s`.
pub fn check_forall(task: &Task, s: &State, set: &[ActionId]) -> bool {
    let set = normalized(set);
    if !known(task, &set) || !task.is_confluent(&set) || !preconditions_hold(task, s, &set) {
        return false;
    }
    invalidation_graph(task, &set).edges.is_empty()
}

/// Some ordering is executable and all preconditions hold in `s` already.
pub fn check_exists(task: &Task, s: &State, set: &[ActionId]) -> (bool, Option<Vec<ActionId>>) {
    let set = normalized(set);
    if !known(task, &set) || !task.is_confluent(&set) || !preconditions_hold(task, s, &set) {
        return (false, None);
    }
    match invalidation_graph(task, &set).serialization() {
        Some(w) => (true, Some(w)),
        None => (false, None),
    }
}

/// Least fixpoint over apply/ready: an action applies once its precondition
/// holds in `s` and every other member whose precondition it breaks is ready.
/// Returns the derivation order and the members that never became ready.
fn exists_fixpoint(task: &Task, s: &State, set: &[ActionId]) -> (Vec<ActionId>, Vec<ActionId>) {
    let mut applied = vec![false; set.len()];
    let mut order = Vec::new();
    loop {
        let next = (0..set.len()).find(|&i| {
            !applied[i]
                && task.actions()[set[i].index()].applicable(s)
                && (0..set.len()).all(|j| j == i || applied[j] || !invalidates(task, set[i], set[j]))
        });
        match next {
            Some(i) => {
                applied[i] = true;
                order.push(set[i]);
            }
            None => break,
        }
    }
    let stuck = (0..set.len()).filter(|&i| !applied[i]).map(|i| set[i]).collect();
    (order, stuck)
}

/// Same verdict as [`check_exists`], computed by the apply/ready fixpoint.
pub fn check_exists_fixpoint(task: &Task, s: &State, set: &[ActionId]) -> (bool, Option<Vec<ActionId>>) {
    let set = normalized(set);
    if !known(task, &set) || !task.is_confluent(&set) {
        return (false, None);
    }
    let (order, stuck) = exists_fixpoint(task, s, &set);
    if stuck.is_empty() {
        (true, Some(order))
    } else {
        (false, None)
    }
}

/// Members left unapplied by the exists-step fixpoint; empty iff accepted.
pub fn exists_non_ready(task: &Task, s: &State, set: &[ActionId]) -> Vec<ActionId> {
    let set = normalized(set);
    if !task.is_confluent(&set) {
        return set;
    }
    exists_fixpoint(task, s, &set).1
}

/// Relaxed fixpoint: like the exists-step one, but preconditions may be
/// met by values reached through postconditions of already applied members.
fn relaxed_fixpoint(task: &Task, s: &State, set: &[ActionId]) -> (Vec<ActionId>, Vec<ActionId>) {
    let mut reach: HashSet<(FluentId, ValueId)> = task.fluent_ids().map(|f| (f, s.get(f))).collect();
    let mut applied = vec![false; set.len()];
    let mut order = Vec::new();
    loop {
        let next = (0..set.len()).find(|&i| {
            !applied[i]
                && task.actions()[set[i].index()].pre.iter().all(|p| reach.contains(&p))
                && (0..set.len()).all(|j| j == i || applied[j] || !invalidates(task, set[i], set[j]))
        });
        match next {
            Some(i) => {
                applied[i] = true;
                order.push(set[i]);
                reach.extend(task.actions()[set[i].index()].post.iter());
            }
            None => break,
        }
    }
    let stuck = (0..set.len()).filter(|&i| !applied[i]).map(|i| set[i]).collect();
    (order, stuck)
}

pub fn check_relaxed(task: &Task, s: &State, set: &[ActionId]) -> (bool, Option<Vec<ActionId>>) {
    let set = normalized(set);
    if !known(task, &set) || !task.is_confluent(&set) {
        return (false, None);
    }
    let (order, stuck) = relaxed_fixpoint(task, s, &set);
    if stuck.is_empty() {
        (true, Some(order))
    } else {
        (false, None)
    }
}

/// Members left unapplied by the relaxed fixpoint; empty iff accepted.
pub fn relaxed_non_ready(task: &Task, s: &State, set: &[ActionId]) -> Vec<ActionId> {
    let set = normalized(set);
    if !task.is_confluent(&set) {
        return set;
    }
    relaxed_fixpoint(task, s, &set).1
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle limited to {max} actions, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("oracle does not decide sequential semantics")]
    Sequential,
}

pub const ORACLE_MAX: usize = 8;

/// Brute-force decision by enumerating every permutation of `set`.
pub fn oracle_serializable(task: &Task, s: &State, set: &[ActionId], semantics: Semantics) -> Result<bool, OracleError> {
    let set = normalized(set);
    if set.len() > ORACLE_MAX {
        return Err(OracleError::TooLarge { max: ORACLE_MAX, got: set.len() });
    }
    if !known(task, &set) || !task.is_confluent(&set) {
        return Ok(false);
    }
    let defined = |perm: &[ActionId]| matches!(task.apply_sequence(s, perm), Ok(Some(_)));
    let mut perm = set.clone();
    let mut any = false;
    let mut all = true;
    permutations(&mut perm, 0, &mut |p| {
        if defined(p) {
            any = true;
        } else {
            all = false;
        }
    });
    let pre = preconditions_hold(task, s, &set);
    Ok(match semantics {
        Semantics::Forall => pre && all,
        Semantics::Exists => pre && any,
        Semantics::Relaxed => any,
        Semantics::Sequential => return Err(OracleError::Sequential),
    })
}

fn permutations(items: &mut Vec<ActionId>, k: usize, visit: &mut impl FnMut(&[ActionId])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InvalidReason {
    NotConfluent,
    Precondition,
    NotSerializable,
    TooManyActions,
    GoalUnmet,
}

impl InvalidReason {
    pub fn code(self) -> &'static str {
        match self {
            InvalidReason::NotConfluent => "not-confluent",
            InvalidReason::Precondition => "precondition",
            InvalidReason::NotSerializable => "not-serializable",
            InvalidReason::TooManyActions => "too-many-actions",
            InvalidReason::GoalUnmet => "goal-unmet",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationReport {
    /// Flattened sequential plan built from the per-step witnesses.
    Valid { sequence: Vec<ActionId> },
    /// `step` is 1-based; a goal failure reports the plan length.
    Invalid { step: usize, reason: InvalidReason },
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationReport::Valid { .. })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationReport::Valid { sequence } => write!(f, "VALID actions={}", sequence.len()),
            ValidationReport::Invalid { step, reason } => write!(f, "INVALID step={} reason={}", step, reason.code()),
        }
    }
}

/// Walks the plan with parallel updates, checking each step under the plan's tag.
pub fn validate_plan(task: &Task, plan: &StepPlan) -> Result<ValidationReport, ModelError> {
    for step in plan.steps() {
        for &a in step {
            task.action(a)?;
        }
    }
    let mut state = task.init().clone();
    let mut sequence = Vec::new();
    for (i, step) in plan.steps().iter().enumerate() {
        let invalid = |reason| Ok(ValidationReport::Invalid { step: i + 1, reason });
        if !task.is_confluent(step) {
            return invalid(InvalidReason::NotConfluent);
        }
        let pre = preconditions_hold(task, &state, step);
        let witness = match plan.semantics() {
            Semantics::Sequential => {
                if step.len() > 1 {
                    return invalid(InvalidReason::TooManyActions);
                }
                if !pre {
                    return invalid(InvalidReason::Precondition);
                }
                step.clone()
            }
            Semantics::Forall => {
                if !pre {
                    return invalid(InvalidReason::Precondition);
                }
                if !check_forall(task, &state, step) {
                    return invalid(InvalidReason::NotSerializable);
                }
                step.clone()
            }
            Semantics::Exists => {
                if !pre {
                    return invalid(InvalidReason::Precondition);
                }
                match check_exists(task, &state, step) {
                    (true, Some(w)) => w,
                    _ => return invalid(InvalidReason::NotSerializable),
                }
            }
            Semantics::Relaxed => match check_relaxed(task, &state, step) {
                (true, Some(w)) => w,
                _ => return invalid(InvalidReason::NotSerializable),
            },
        };
        state = task.parallel_update(&state, step);
        sequence.extend(witness);
    }
    if !task.check_goal(&state) {
        return Ok(ValidationReport::Invalid { step: plan.len(), reason: InvalidReason::GoalUnmet });
    }
    Ok(ValidationReport::Valid { sequence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{counterexample_task, example_task};

    fn ids(task: &Task, names: &[&str]) -> Vec<ActionId> {
        names.iter().map(|n| task.action_by_name(n).unwrap()).collect()
    }

    fn state(vals: &[u32]) -> State {
        State::from_values(vals.iter().map(|&v| ValueId(v)).collect())
    }

    #[test]
    fn forall_examples() {
        let t = example_task();
        assert!(check_forall(&t, &state(&[1, 1, 1, 0, 0]), &ids(&t, &["a3", "a4"])));
        assert!(!check_forall(&t, t.init(), &ids(&t, &["a1", "a2"])));
        assert!(check_forall(&t, t.init(), &[]));
    }

    #[test]
    fn exists_examples() {
        let t = example_task();
        let a = ids(&t, &["a1", "a2"]);
        assert_eq!(check_exists(&t, t.init(), &a), (true, Some(a.clone())));
        assert_eq!(check_exists_fixpoint(&t, t.init(), &a), (true, Some(a.clone())));
        let g = invalidation_graph(&t, &a);
        assert_eq!(g.edges(), &[(a[1], a[0])]);

        let t2 = counterexample_task();
        let b = ids(&t2, &["a1", "a2"]);
        assert_eq!(check_exists(&t2, t2.init(), &b).0, false);
        let a1 = ids(&t, &["a1"]);
        assert_eq!(check_exists(&t, t.init(), &a1), (true, Some(a1.clone())));
    }

    #[test]
    fn relaxed_examples() {
        let t = example_task();
        let all = ids(&t, &["a1", "a2", "a3", "a4"]);
        assert_eq!(check_relaxed(&t, t.init(), &all), (true, Some(all.clone())));
        assert_eq!(check_relaxed(&t, t.init(), &[]), (true, Some(vec![])));

        let t2 = counterexample_task();
        let b = ids(&t2, &["a1", "a2"]);
        assert!(invalidation_graph(&t2, &b).is_acyclic());
        assert_eq!(check_relaxed(&t2, t2.init(), &b), (false, None));
        assert_eq!(relaxed_non_ready(&t2, t2.init(), &b), b);
    }

    #[test]
    fn oracle_examples() {
        let t = example_task();
        let s2 = state(&[1, 1, 1, 0, 0]);
        for sem in [Semantics::Forall, Semantics::Exists, Semantics::Relaxed] {
            assert!(oracle_serializable(&t, &s2, &ids(&t, &["a3", "a4"]), sem).unwrap());
        }
        let a = ids(&t, &["a1", "a2"]);
        assert!(!oracle_serializable(&t, t.init(), &a, Semantics::Forall).unwrap());
        assert!(oracle_serializable(&t, t.init(), &a, Semantics::Exists).unwrap());
        assert!(oracle_serializable(&t, t.init(), &a, Semantics::Relaxed).unwrap());

        let t2 = counterexample_task();
        let b = ids(&t2, &["a1", "a2"]);
        for sem in [Semantics::Forall, Semantics::Exists, Semantics::Relaxed] {
            assert!(!oracle_serializable(&t2, t2.init(), &b, sem).unwrap());
        }
        let big: Vec<ActionId> = (0..9).map(ActionId).collect();
        assert!(matches!(
            oracle_serializable(&t, t.init(), &big, Semantics::Exists),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn validate_examples() {
        let t = example_task();
        let [a1, a2, a3, a4] = [0, 1, 2, 3].map(ActionId);
        let p = StepPlan::new(vec![vec![a1], vec![a2], vec![a3, a4]], Semantics::Forall).unwrap();
        assert_eq!(validate_plan(&t, &p).unwrap(), ValidationReport::Valid { sequence: vec![a1, a2, a3, a4] });

        let p = StepPlan::new(vec![vec![a1, a2], vec![a3, a4]], Semantics::Forall).unwrap();
        let r = validate_plan(&t, &p).unwrap();
        assert_eq!(r, ValidationReport::Invalid { step: 1, reason: InvalidReason::NotSerializable });
        assert_eq!(r.to_string(), "INVALID step=1 reason=not-serializable");
        assert!(validate_plan(&t, &p.with_semantics(Semantics::Exists).unwrap()).unwrap().is_valid());

        let empty = StepPlan::new(vec![], Semantics::Sequential).unwrap();
        assert_eq!(
            validate_plan(&t, &empty).unwrap(),
            ValidationReport::Invalid { step: 0, reason: InvalidReason::GoalUnmet }
        );

        let relaxed = StepPlan::new(vec![vec![a1, a2, a3, a4]], Semantics::Relaxed).unwrap();
        assert!(validate_plan(&t, &relaxed).unwrap().is_valid());
        let bad = StepPlan::new(vec![vec![ActionId(12)]], Semantics::Relaxed).unwrap();
        assert!(validate_plan(&t, &bad).is_err());
    }

    #[test]
    fn sequential_validation_reasons() {
        let t = example_task();
        let p = StepPlan::new(vec![vec![ActionId(2)]], Semantics::Sequential).unwrap();
        assert_eq!(
            validate_plan(&t, &p).unwrap(),
            ValidationReport::Invalid { step: 1, reason: InvalidReason::Precondition }
        );
    }
}
