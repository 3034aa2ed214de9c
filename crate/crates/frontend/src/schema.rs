//! Lifted task in the form the grounder consumes.

use std::collections::BTreeMap;

use crate::pddl::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub pred: String,
    pub args: Vec<Term>,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaAction {
    pub name: String,
    /// `(variable, either-types)` in declaration order.
    pub params: Vec<(String, Vec<String>)>,
    pub pre: Vec<Literal>,
    /// `(a, b, true)` requires `a = b`; `false` requires them to differ.
    pub equalities: Vec<(Term, Term, bool)>,
    pub effects: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaTask {
    /// Predicate name and the either-types of each argument.
    pub predicates: Vec<(String, Vec<Vec<String>>)>,
    /// Type to its parents; `object` is the implicit root.
    pub types: BTreeMap<String, Vec<String>>,
    /// Constants and problem objects with their declared types.
    pub objects: Vec<(String, Vec<String>)>,
    pub actions: Vec<SchemaAction>,
    /// Ground atoms true initially.
    pub init: Vec<(String, Vec<String>)>,
    /// Conjunction of ground literals.
    pub goal: Vec<Literal>,
    pub goal_equalities: Vec<(Term, Term, bool)>,
}

impl SchemaTask {
    /// Predicates that no action changes.
    pub fn static_predicates(&self) -> Vec<&str> {
        self.predicates
            .iter()
            .map(|(p, _)| p.as_str())
            .filter(|p| !self.actions.iter().any(|a| a.effects.iter().any(|e| e.pred == *p)))
            .collect()
    }

    /// `ty` and all its ancestors.
    pub fn ancestors(&self, ty: &str) -> Vec<String> {
        let mut out = vec![ty.to_string()];
        let mut i = 0;
        while i < out.len() {
            if let Some(ps) = self.types.get(&out[i]) {
                for p in ps {
                    if !out.contains(p) {
                        out.push(p.clone());
                    }
                }
            }
            i += 1;
        }
        if !out.iter().any(|t| t == "object") {
            out.push("object".into());
        }
        out
    }

    /// Objects usable where any of `types` is expected, in declaration order.
    pub fn objects_of(&self, types: &[String]) -> Vec<&str> {
        self.objects
            .iter()
            .filter(|(_, ots)| ots.iter().any(|ot| self.ancestors(ot).iter().any(|a| types.contains(a))))
            .map(|(o, _)| o.as_str())
            .collect()
    }
}
