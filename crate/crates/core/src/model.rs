//! Multivalued planning tasks: fluents, states, actions and successor semantics.

use std::collections::HashMap;
use std::fmt;

use crate::error::ModelError;

/// Ordinal of a fluent within its task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluentId(pub u32);

/// Ordinal of an action within its task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

/// Index of a value within the domain of one fluent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueId(pub u32);

impl FluentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ValueId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A state variable with a finite, ordered domain of value symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fluent {
    pub name: String,
    pub values: Vec<String>,
}

impl Fluent {
    pub fn value_id(&self, symbol: &str) -> Option<ValueId> {
        self.values
            .iter()
            .position(|v| v == symbol)
            .map(|i| ValueId(i as u32))
    }
}

/// Assignment to a subset of fluents, kept sorted by fluent ordinal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PartialState {
    bindings: Vec<(FluentId, ValueId)>,
}

impl PartialState {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a partial state; repeated identical bindings collapse, conflicting ones fail.
    pub fn new(mut bindings: Vec<(FluentId, ValueId)>) -> Result<Self, ModelError> {
        bindings.sort();
        bindings.dedup();
        for pair in bindings.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ModelError::ConflictingBinding {
                    fluent: pair[0].0 .0.to_string(),
                });
            }
        }
        Ok(Self { bindings })
    }

    pub fn get(&self, fluent: FluentId) -> Option<ValueId> {
        self.bindings
            .binary_search_by_key(&fluent, |&(f, _)| f)
            .ok()
            .map(|i| self.bindings[i].1)
    }

    pub fn contains(&self, fluent: FluentId) -> bool {
        self.get(fluent).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FluentId, ValueId)> + '_ {
        self.bindings.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn as_slice(&self) -> &[(FluentId, ValueId)] {
        &self.bindings
    }

    /// True iff `state` agrees with every binding.
    pub fn holds_in(&self, state: &State) -> bool {
        self.bindings.iter().all(|&(f, v)| state.get(f) == v)
    }
}

/// Total assignment, one value per fluent ordinal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    values: Vec<ValueId>,
}

impl State {
    pub fn from_values(values: Vec<ValueId>) -> Self {
        Self { values }
    }

    #[inline]
    pub fn get(&self, fluent: FluentId) -> ValueId {
        self.values[fluent.index()]
    }

    #[inline]
    pub fn set(&mut self, fluent: FluentId, value: ValueId) {
        self.values[fluent.index()] = value;
    }

    pub fn values(&self) -> &[ValueId] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn apply_post(&mut self, post: &PartialState) {
        for (f, v) in post.iter() {
            self.set(f, v);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub pre: PartialState,
    pub post: PartialState,
}

impl Action {
    pub fn applicable(&self, state: &State) -> bool {
        self.pre.holds_in(state)
    }
}

/// Plan semantics a step plan is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semantics {
    Sequential,
    Forall,
    Exists,
    Relaxed,
}

impl Semantics {
    pub const ALL: [Semantics; 4] = [
        Semantics::Sequential,
        Semantics::Forall,
        Semantics::Exists,
        Semantics::Relaxed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Sequential => "sequential",
            Semantics::Forall => "forall",
            Semantics::Exists => "exists",
            Semantics::Relaxed => "relaxed",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" | "seq" => Ok(Semantics::Sequential),
            "forall" => Ok(Semantics::Forall),
            "exists" => Ok(Semantics::Exists),
            "relaxed" => Ok(Semantics::Relaxed),
            other => Err(format!("unknown semantics `{other}`")),
        }
    }
}

/// A ground planning task with multivalued fluents.
///
/// Immutable once built; construct through [`TaskBuilder`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    fluents: Vec<Fluent>,
    init: State,
    goal: PartialState,
    actions: Vec<Action>,
    mutex_groups: Vec<Vec<(FluentId, ValueId)>>,
    fluent_index: HashMap<String, FluentId>,
    action_index: HashMap<String, ActionId>,
}

impl Task {
    pub fn fluents(&self) -> &[Fluent] {
        &self.fluents
    }

    pub fn fluent(&self, id: FluentId) -> &Fluent {
        &self.fluents[id.index()]
    }

    pub fn fluent_ids(&self) -> impl Iterator<Item = FluentId> {
        (0..self.fluents.len() as u32).map(FluentId)
    }

    pub fn init(&self) -> &State {
        &self.init
    }

    pub fn goal(&self) -> &PartialState {
        &self.goal
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len() as u32).map(ActionId)
    }

    pub fn action(&self, id: ActionId) -> Result<&Action, ModelError> {
        self.actions
            .get(id.index())
            .ok_or_else(|| ModelError::UnknownAction(format!("#{}", id.0)))
    }

    pub fn mutex_groups(&self) -> &[Vec<(FluentId, ValueId)>] {
        &self.mutex_groups
    }

    pub fn fluent_by_name(&self, name: &str) -> Option<FluentId> {
        self.fluent_index.get(name).copied()
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    pub fn value_name(&self, fluent: FluentId, value: ValueId) -> &str {
        &self.fluents[fluent.index()].values[value.index()]
    }

    /// Successor state, or `None` when the precondition does not hold in `state`.
    pub fn successor(&self, state: &State, action: ActionId) -> Result<Option<State>, ModelError> {
        let a = self.action(action)?;
        self.check_state(state)?;
        if !a.applicable(state) {
            return Ok(None);
        }
        let mut next = state.clone();
        next.apply_post(&a.post);
        Ok(Some(next))
    }

    /// Left fold of [`Task::successor`]; `None` as soon as one step is undefined.
    pub fn apply_sequence(&self, state: &State, seq: &[ActionId]) -> Result<Option<State>, ModelError> {
        self.check_state(state)?;
        for &id in seq {
            self.action(id)?;
        }
        let mut cur = state.clone();
        for &id in seq {
            let a = &self.actions[id.index()];
            if !a.applicable(&cur) {
                return Ok(None);
            }
            cur.apply_post(&a.post);
        }
        Ok(Some(cur))
    }

    pub fn check_goal(&self, state: &State) -> bool {
        self.goal.holds_in(state)
    }

    /// Every pair of actions in `set` agrees on shared postcondition fluents.
    pub fn is_confluent(&self, set: &[ActionId]) -> bool {
        let mut seen: HashMap<FluentId, ValueId> = HashMap::new();
        for &id in set {
            let Some(a) = self.actions.get(id.index()) else {
                return false;
            };
            for (f, v) in a.post.iter() {
                if let Some(&prev) = seen.get(&f) {
                    if prev != v {
                        return false;
                    }
                } else {
                    seen.insert(f, v);
                }
            }
        }
        true
    }

    /// Parallel update: postconditions of every action in `set` applied to `state`.
    pub fn parallel_update(&self, state: &State, set: &[ActionId]) -> State {
        let mut next = state.clone();
        for &id in set {
            next.apply_post(&self.actions[id.index()].post);
        }
        next
    }

    pub fn satisfies_mutexes(&self, state: &State) -> bool {
        self.mutex_groups
            .iter()
            .all(|g| g.iter().filter(|&&(f, v)| state.get(f) == v).count() <= 1)
    }

    fn check_state(&self, state: &State) -> Result<(), ModelError> {
        if state.len() != self.fluents.len() {
            return Err(ModelError::StateWidth {
                expected: self.fluents.len(),
                found: state.len(),
            });
        }
        for (i, v) in state.values().iter().enumerate() {
            if v.index() >= self.fluents[i].values.len() {
                return Err(ModelError::UnknownValue {
                    fluent: self.fluents[i].name.clone(),
                    value: format!("#{}", v.0),
                });
            }
        }
        Ok(())
    }

    pub fn format_state(&self, state: &State) -> String {
        self.fluent_ids()
            .map(|f| format!("{}={}", self.fluent(f).name, self.value_name(f, state.get(f))))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Incremental, validating constructor for [`Task`].
#[derive(Debug, Default)]
pub struct TaskBuilder {
    fluents: Vec<Fluent>,
    fluent_index: HashMap<String, FluentId>,
    init: Vec<Option<ValueId>>,
    goal: Vec<(FluentId, ValueId)>,
    actions: Vec<Action>,
    action_index: HashMap<String, ActionId>,
    mutex_groups: Vec<Vec<(FluentId, ValueId)>>,
}

impl TaskBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_fluent<S: Into<String>>(&mut self, name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Result<FluentId, ModelError> {
        let name = name.into();
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(ModelError::EmptyDomain(name));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(ModelError::DuplicateValue { fluent: name, value: v.clone() });
            }
        }
        if self.fluent_index.contains_key(&name) {
            return Err(ModelError::DuplicateFluent(name));
        }
        let id = FluentId(self.fluents.len() as u32);
        self.fluent_index.insert(name.clone(), id);
        self.fluents.push(Fluent { name, values });
        self.init.push(None);
        Ok(id)
    }

    pub fn fluent_id(&self, name: &str) -> Result<FluentId, ModelError> {
        self.fluent_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownFluent(name.to_string()))
    }

    pub fn value_id(&self, fluent: FluentId, symbol: &str) -> Result<ValueId, ModelError> {
        let fl = self
            .fluents
            .get(fluent.index())
            .ok_or_else(|| ModelError::UnknownFluent(format!("#{}", fluent.0)))?;
        fl.value_id(symbol).ok_or_else(|| ModelError::UnknownValue {
            fluent: fl.name.clone(),
            value: symbol.to_string(),
        })
    }

    /// Resolves a `(fluent, value)` pair given by symbols.
    pub fn binding(&self, fluent: &str, value: &str) -> Result<(FluentId, ValueId), ModelError> {
        let f = self.fluent_id(fluent)?;
        Ok((f, self.value_id(f, value)?))
    }

    pub fn fluent_count(&self) -> usize {
        self.fluents.len()
    }

    pub fn set_init(&mut self, fluent: FluentId, value: ValueId) -> Result<(), ModelError> {
        self.check_binding(fluent, value)?;
        let slot = &mut self.init[fluent.index()];
        match slot {
            Some(prev) if *prev != value => Err(ModelError::ConflictingBinding {
                fluent: self.fluents[fluent.index()].name.clone(),
            }),
            _ => {
                *slot = Some(value);
                Ok(())
            }
        }
    }

    pub fn add_goal(&mut self, fluent: FluentId, value: ValueId) -> Result<(), ModelError> {
        self.check_binding(fluent, value)?;
        self.goal.push((fluent, value));
        Ok(())
    }

    pub fn add_action(
        &mut self,
        name: impl Into<String>,
        pre: Vec<(FluentId, ValueId)>,
        post: Vec<(FluentId, ValueId)>,
    ) -> Result<ActionId, ModelError> {
        let name = name.into();
        if self.action_index.contains_key(&name) {
            return Err(ModelError::DuplicateAction(name));
        }
        for &(f, v) in pre.iter().chain(post.iter()) {
            self.check_binding(f, v)?;
        }
        if post.is_empty() {
            return Err(ModelError::EmptyPostcondition(name));
        }
        let pre = PartialState::new(pre).map_err(|e| self.name_conflict(e))?;
        let post = PartialState::new(post).map_err(|e| self.name_conflict(e))?;
        let id = ActionId(self.actions.len() as u32);
        self.action_index.insert(name.clone(), id);
        self.actions.push(Action { name, pre, post });
        Ok(id)
    }

    pub fn add_mutex_group(&mut self, group: Vec<(FluentId, ValueId)>) -> Result<(), ModelError> {
        for &(f, v) in &group {
            self.check_binding(f, v)?;
        }
        self.mutex_groups.push(group);
        Ok(())
    }

    pub fn build(self) -> Result<Task, ModelError> {
        let mut init = Vec::with_capacity(self.init.len());
        for (i, v) in self.init.iter().enumerate() {
            match v {
                Some(v) => init.push(*v),
                None => return Err(ModelError::NonTotalInit(self.fluents[i].name.clone())),
            }
        }
        let goal = PartialState::new(self.goal.clone()).map_err(|e| self.name_conflict(e))?;
        let task = Task {
            init: State::from_values(init),
            goal,
            fluents: self.fluents,
            actions: self.actions,
            mutex_groups: self.mutex_groups,
            fluent_index: self.fluent_index,
            action_index: self.action_index,
        };
        for (g, group) in task.mutex_groups.iter().enumerate() {
            if group.iter().filter(|&&(f, v)| task.init.get(f) == v).count() > 1 {
                return Err(ModelError::MutexViolatedByInit(g));
            }
        }
        Ok(task)
    }

    fn check_binding(&self, fluent: FluentId, value: ValueId) -> Result<(), ModelError> {
        let fl = self
            .fluents
            .get(fluent.index())
            .ok_or_else(|| ModelError::UnknownFluent(format!("#{}", fluent.0)))?;
        if value.index() >= fl.values.len() {
            return Err(ModelError::UnknownValue {
                fluent: fl.name.clone(),
                value: format!("#{}", value.0),
            });
        }
        Ok(())
    }

    // PartialState::new reports ordinals; swap in the fluent name.
    fn name_conflict(&self, e: ModelError) -> ModelError {
        match e {
            ModelError::ConflictingBinding { fluent } => {
                let name = fluent
                    .parse::<usize>()
                    .ok()
                    .and_then(|i| self.fluents.get(i))
                    .map(|f| f.name.clone())
                    .unwrap_or(fluent);
                ModelError::ConflictingBinding { fluent: name }
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{counterexample_task, example_task};

    fn ids(task: &Task, names: &[&str]) -> Vec<ActionId> {
        names.iter().map(|n| task.action_by_name(n).unwrap()).collect()
    }

    fn state(task: &Task, vals: &[u32]) -> State {
        assert_eq!(vals.len(), task.fluents().len());
        State::from_values(vals.iter().map(|&v| ValueId(v)).collect())
    }

    #[test]
    fn successor_applies_postcondition() {
        let t = example_task();
        let a1 = t.action_by_name("a1").unwrap();
        let next = t.successor(t.init(), a1).unwrap().unwrap();
        assert_eq!(next, state(&t, &[1, 1, 0, 0, 0]));
    }

    #[test]
    fn successor_undefined_when_precondition_fails() {
        let t = example_task();
        let a3 = t.action_by_name("a3").unwrap();
        assert_eq!(t.successor(t.init(), a3).unwrap(), None);
    }

    #[test]
    fn identity_effect_keeps_state() {
        let mut b = TaskBuilder::new();
        let x = b.add_fluent("x", ["0", "1"]).unwrap();
        let y = b.add_fluent("y", ["0", "1"]).unwrap();
        b.set_init(x, ValueId(1)).unwrap();
        b.set_init(y, ValueId(0)).unwrap();
        let a = b.add_action("noop", vec![], vec![(x, ValueId(1))]).unwrap();
        let t = b.build().unwrap();
        assert_eq!(t.successor(t.init(), a).unwrap().as_ref(), Some(t.init()));
    }

    #[test]
    fn unknown_action_is_an_error() {
        let t = example_task();
        assert!(matches!(
            t.successor(t.init(), ActionId(99)),
            Err(ModelError::UnknownAction(_))
        ));
        assert!(t.apply_sequence(t.init(), &[ActionId(7)]).is_err());
    }

    #[test]
    fn sequential_plans_of_example() {
        let t = example_task();
        for order in [["a1", "a2", "a3", "a4"], ["a1", "a2", "a4", "a3"]] {
            let end = t.apply_sequence(t.init(), &ids(&t, &order)).unwrap().unwrap();
            assert!(t.check_goal(&end));
        }
        assert_eq!(t.apply_sequence(t.init(), &ids(&t, &["a2", "a1"])).unwrap(), None);
        assert_eq!(t.apply_sequence(t.init(), &[]).unwrap().as_ref(), Some(t.init()));
    }

    #[test]
    fn goal_checks() {
        let t = example_task();
        assert!(!t.check_goal(t.init()));
        let mut b = TaskBuilder::new();
        let x = b.add_fluent("x", ["a"]).unwrap();
        b.set_init(x, ValueId(0)).unwrap();
        let empty_goal = b.build().unwrap();
        assert!(empty_goal.check_goal(empty_goal.init()));
    }

    #[test]
    fn confluence() {
        let t = example_task();
        assert!(t.is_confluent(&ids(&t, &["a3", "a4"])));
        assert!(t.is_confluent(&ids(&t, &["a1", "a2"])));
        assert!(t.is_confluent(&ids(&t, &["a1"])));
        assert!(t.is_confluent(&[]));

        let mut b = TaskBuilder::new();
        let x = b.add_fluent("x", ["0", "1"]).unwrap();
        b.set_init(x, ValueId(0)).unwrap();
        let p = b.add_action("p", vec![], vec![(x, ValueId(0))]).unwrap();
        let q = b.add_action("q", vec![], vec![(x, ValueId(1))]).unwrap();
        let t = b.build().unwrap();
        assert!(!t.is_confluent(&[p, q]));
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut b = TaskBuilder::new();
        assert!(matches!(b.add_fluent("x", Vec::<String>::new()), Err(ModelError::EmptyDomain(_))));
        assert!(matches!(b.add_fluent("x", ["0", "0"]), Err(ModelError::DuplicateValue { .. })));
        let x = b.add_fluent("x", ["0", "1"]).unwrap();
        assert!(matches!(b.add_action("e", vec![], vec![]), Err(ModelError::EmptyPostcondition(_))));
        assert!(matches!(
            b.add_action("c", vec![], vec![(x, ValueId(0)), (x, ValueId(1))]),
            Err(ModelError::ConflictingBinding { fluent }) if fluent == "x"
        ));
        b.add_action("a", vec![], vec![(x, ValueId(1))]).unwrap();
        assert!(matches!(b.add_action("a", vec![], vec![(x, ValueId(1))]), Err(ModelError::DuplicateAction(_))));
        assert!(matches!(b.build(), Err(ModelError::NonTotalInit(_))));
    }

    #[test]
    fn init_must_respect_mutexes() {
        let mut b = TaskBuilder::new();
        let x = b.add_fluent("x", ["0", "1"]).unwrap();
        let y = b.add_fluent("y", ["0", "1"]).unwrap();
        b.set_init(x, ValueId(0)).unwrap();
        b.set_init(y, ValueId(1)).unwrap();
        b.add_mutex_group(vec![(x, ValueId(0)), (y, ValueId(1))]).unwrap();
        assert!(matches!(b.build(), Err(ModelError::MutexViolatedByInit(0))));
    }

    #[test]
    fn counterexample_has_no_applicable_second_action() {
        let t = counterexample_task();
        let a1 = t.action_by_name("a1").unwrap();
        let a2 = t.action_by_name("a2").unwrap();
        assert_eq!(t.successor(t.init(), a2).unwrap(), None);
        let s1 = t.successor(t.init(), a1).unwrap().unwrap();
        assert_eq!(t.successor(&s1, a2).unwrap(), None);
    }
}
