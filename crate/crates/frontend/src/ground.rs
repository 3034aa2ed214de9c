//! Instantiates action schemas over the object universe.
//!
//! Each non-static ground atom becomes a fluent `pred(o1,...,on)` with values
//! `false` and `true`; each surviving substitution becomes an action
//! `name(o1,...,on)`. Predicates no action changes are static: they are
//! checked against the initial state while parameters are being bound and
//! never become fluents.

use std::collections::{BTreeSet, HashMap, HashSet};

use stepwise_core::{ModelError, Task, TaskBuilder, ValueId};
use thiserror::Error;

use crate::pddl::Term;
use crate::schema::{Literal, SchemaAction, SchemaTask};

pub const DEFAULT_MAX_ACTIONS: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundOptions {
    /// Guard on the number of substitutions visited across all schemas.
    pub max_actions: usize,
    /// Drop actions whose positive preconditions are unreachable when
    /// deletes are ignored.
    pub relaxed_reachability: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        Self { max_actions: DEFAULT_MAX_ACTIONS, relaxed_reachability: false }
    }
}

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("grounding too large: more than {limit} ground actions (reached {count} at schema `{schema}`)")]
    TooLarge { schema: String, count: usize, limit: usize },
    #[error("goal requires `{0}`, which is false")]
    FalseGoalEquality(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug)]
pub struct Grounded {
    pub task: Task,
    pub warnings: Vec<String>,
}

type GroundAtom = (String, Vec<String>);

fn fluent_name((pred, args): &GroundAtom) -> String {
    if args.is_empty() {
        pred.clone()
    } else {
        format!("{pred}({})", args.join(","))
    }
}

/// Removes schemas that need a static predicate with no true instance at all.
///
/// Instance-level pruning against the initial state happens during
/// [`ground`], as soon as a static precondition's arguments are bound.
pub fn static_filter(st: &SchemaTask) -> SchemaTask {
    let statics: HashSet<&str> = st.static_predicates().into_iter().collect();
    let inhabited: HashSet<&str> = st.init.iter().map(|(p, _)| p.as_str()).collect();
    let mut out = st.clone();
    out.actions.retain(|a| {
        !a.pre
            .iter()
            .any(|l| l.positive && statics.contains(l.pred.as_str()) && !inhabited.contains(l.pred.as_str()))
    });
    out
}

fn resolve(t: &Term, binding: &HashMap<&str, &str>) -> Option<String> {
    match t {
        Term::Const(c) => Some(c.clone()),
        Term::Var(v) => binding.get(v.as_str()).map(|s| s.to_string()),
    }
}

fn instantiate(l: &Literal, binding: &HashMap<&str, &str>) -> GroundAtom {
    (l.pred.clone(), l.args.iter().map(|t| resolve(t, binding).expect("parameters bound")).collect())
}

/// Variables a literal or equality mentions.
fn vars_of<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Vec<&'a str> {
    terms
        .into_iter()
        .filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
        .collect()
}

struct GroundAction {
    name: String,
    pre: Vec<(GroundAtom, bool)>,
    post: Vec<(GroundAtom, bool)>,
}

enum Check<'a> {
    Static(&'a Literal),
    Eq(&'a Term, &'a Term, bool),
}

struct Grounder<'a> {
    st: &'a SchemaTask,
    statics: HashSet<&'a str>,
    init: HashSet<GroundAtom>,
    visited: usize,
    limit: usize,
}

impl<'a> Grounder<'a> {
    fn holds(&self, check: &Check<'_>, binding: &HashMap<&str, &str>) -> bool {
        match check {
            Check::Static(l) => self.init.contains(&instantiate(l, binding)) == l.positive,
            Check::Eq(a, b, want) => (resolve(a, binding) == resolve(b, binding)) == *want,
        }
    }

    fn schema(&mut self, a: &'a SchemaAction, warnings: &mut Vec<String>, out: &mut Vec<GroundAction>) -> Result<(), GroundError> {
        let domains: Vec<Vec<&str>> = a.params.iter().map(|(_, ts)| self.st.objects_of(ts)).collect();
        if let Some((v, ts)) = a.params.iter().zip(&domains).find(|(_, d)| d.is_empty()).map(|(p, _)| p) {
            warnings.push(format!("no objects of type {} for ?{v}; action {} has no instances", ts.join("|"), a.name));
            return Ok(());
        }
        // Each check runs at the depth where its last variable is bound.
        let depth_of = |vars: Vec<&str>| {
            vars.iter().map(|v| a.params.iter().position(|(p, _)| p == v).map_or(0, |i| i + 1)).max().unwrap_or(0)
        };
        let mut checks: Vec<Vec<Check<'a>>> = (0..=a.params.len()).map(|_| Vec::new()).collect();
        for l in a.pre.iter().filter(|l| self.statics.contains(l.pred.as_str())) {
            checks[depth_of(vars_of(&l.args))].push(Check::Static(l));
        }
        for (x, y, want) in &a.equalities {
            checks[depth_of(vars_of([x, y]))].push(Check::Eq(x, y, *want));
        }
        let mut binding: HashMap<&str, &str> = HashMap::new();
        let mut chosen: Vec<usize> = vec![0; a.params.len()];
        let mut depth = 0usize;
        // Iterative backtracking over parameter positions.
        if !checks[0].iter().all(|c| self.holds(c, &binding)) {
            return Ok(());
        }
        if a.params.is_empty() {
            self.emit(a, &binding, out)?;
            return Ok(());
        }
        loop {
            if chosen[depth] == domains[depth].len() {
                chosen[depth] = 0;
                binding.remove(a.params[depth].0.as_str());
                if depth == 0 {
                    return Ok(());
                }
                depth -= 1;
                chosen[depth] += 1;
                continue;
            }
            binding.insert(a.params[depth].0.as_str(), domains[depth][chosen[depth]]);
            if !checks[depth + 1].iter().all(|c| self.holds(c, &binding)) {
                chosen[depth] += 1;
                continue;
            }
            if depth + 1 == a.params.len() {
                self.emit(a, &binding, out)?;
                chosen[depth] += 1;
            } else {
                depth += 1;
            }
        }
    }

    fn emit(&mut self, a: &SchemaAction, binding: &HashMap<&str, &str>, out: &mut Vec<GroundAction>) -> Result<(), GroundError> {
        self.visited += 1;
        if self.visited > self.limit {
            return Err(GroundError::TooLarge { schema: a.name.clone(), count: self.visited, limit: self.limit });
        }
        let mut pre: Vec<(GroundAtom, bool)> = Vec::new();
        for l in a.pre.iter().filter(|l| !self.statics.contains(l.pred.as_str())) {
            let atom = instantiate(l, binding);
            match pre.iter().find(|(x, _)| *x == atom) {
                Some((_, v)) if *v != l.positive => return Ok(()),
                Some(_) => {}
                None => pre.push((atom, l.positive)),
            }
        }
        // Deletes apply before adds, so an atom both added and deleted ends up true.
        let mut post: Vec<(GroundAtom, bool)> = Vec::new();
        for l in &a.effects {
            let atom = instantiate(l, binding);
            match post.iter_mut().find(|(x, _)| *x == atom) {
                Some((_, v)) => *v |= l.positive,
                None => post.push((atom, l.positive)),
            }
        }
        let args: Vec<&str> = a.params.iter().map(|(p, _)| binding[p.as_str()]).collect();
        let name = if args.is_empty() { a.name.clone() } else { format!("{}({})", a.name, args.join(",")) };
        out.push(GroundAction { name, pre, post });
        Ok(())
    }
}

/// Keeps actions reachable when deletes are ignored.
fn relaxed_reachable(init: &HashSet<GroundAtom>, actions: Vec<GroundAction>) -> Vec<GroundAction> {
    let mut reached: HashSet<GroundAtom> = init.clone();
    let mut enabled = vec![false; actions.len()];
    loop {
        let mut changed = false;
        for (i, a) in actions.iter().enumerate() {
            if !enabled[i] && a.pre.iter().all(|(x, v)| !v || reached.contains(x)) {
                enabled[i] = true;
                changed = true;
                for (x, v) in &a.post {
                    if *v {
                        reached.insert(x.clone());
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    actions.into_iter().zip(enabled).filter_map(|(a, e)| e.then_some(a)).collect()
}

pub fn ground(st: &SchemaTask, opts: &GroundOptions) -> Result<Grounded, GroundError> {
    let filtered = static_filter(st);
    let mut warnings = Vec::new();
    let mut g = Grounder {
        st: &filtered,
        statics: filtered.static_predicates().into_iter().collect(),
        init: st.init.iter().cloned().collect(),
        visited: 0,
        limit: opts.max_actions,
    };
    let mut actions = Vec::new();
    for a in &filtered.actions {
        let before = actions.len();
        g.schema(a, &mut warnings, &mut actions)?;
        let empty = actions[before..].iter().filter(|x| x.post.is_empty()).count();
        if empty > 0 {
            warnings.push(format!("action {} has no effects; {empty} instance(s) dropped", a.name));
        }
    }
    actions.retain(|a| !a.post.is_empty());
    if opts.relaxed_reachability {
        actions = relaxed_reachable(&g.init, actions);
    }
    for (x, y, want) in &st.goal_equalities {
        let binding = HashMap::new();
        if (resolve(x, &binding) == resolve(y, &binding)) != *want {
            let op = if *want { "=" } else { "!=" };
            return Err(GroundError::FalseGoalEquality(format!("{} {op} {}", x.render(), y.render())));
        }
    }
    let empty = HashMap::new();
    let mut goal: Vec<(GroundAtom, bool)> = Vec::new();
    for l in &st.goal {
        let atom = instantiate(l, &empty);
        // A static goal that already holds never changes; one that fails stays as a fluent.
        if g.statics.contains(l.pred.as_str()) && g.init.contains(&atom) == l.positive {
            continue;
        }
        goal.push((atom, l.positive));
    }
    let pred_rank: HashMap<&str, usize> = st.predicates.iter().enumerate().map(|(i, (p, _))| (p.as_str(), i)).collect();
    let obj_rank: HashMap<&str, usize> = st.objects.iter().enumerate().map(|(i, (o, _))| (o.as_str(), i)).collect();
    let key = |(p, args): &GroundAtom| {
        (pred_rank.get(p.as_str()).copied().unwrap_or(usize::MAX), args.iter().map(|a| obj_rank.get(a.as_str()).copied().unwrap_or(usize::MAX)).collect::<Vec<_>>())
    };
    let atoms: BTreeSet<_> = actions
        .iter()
        .flat_map(|a| a.pre.iter().chain(&a.post).map(|(x, _)| x))
        .chain(goal.iter().map(|(x, _)| x))
        .map(|x| (key(x), x.clone()))
        .collect();
    let mut b = TaskBuilder::new();
    let mut ids = HashMap::new();
    for (_, atom) in &atoms {
        let f = b.add_fluent(fluent_name(atom), ["false", "true"])?;
        b.set_init(f, ValueId(u32::from(g.init.contains(atom))))?;
        ids.insert(atom.clone(), f);
    }
    let bind = |v: &[(GroundAtom, bool)]| v.iter().map(|(x, val)| (ids[x], ValueId(u32::from(*val)))).collect::<Vec<_>>();
    for (f, v) in bind(&goal) {
        b.add_goal(f, v)?;
    }
    for a in &actions {
        b.add_action(a.name.clone(), bind(&a.pre), bind(&a.post))?;
    }
    Ok(Grounded { task: b.build()?, warnings })
}
