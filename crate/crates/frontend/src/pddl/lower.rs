//! Normalized AST to conjunctive action schemas.

use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::*;
use super::sexpr::{SExpr, Span};
use super::{normalize, Part};
use crate::schema::{Literal, SchemaAction, SchemaTask};

/// Requirement flags whose constructs the lowering handles.
pub const SUPPORTED_REQUIREMENTS: [&str; 4] = [":strips", ":typing", ":negative-preconditions", ":equality"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{part}:{span}: unsupported: {construct}")]
pub struct ResidualConstruct {
    pub part: Part,
    pub span: Span,
    /// Human-readable name of the offending node, e.g. `conditional effect`.
    pub construct: String,
}

/// Something the lowering could not use. Fatal findings stop the lowering;
/// the others are parsed and skipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub part: Part,
    pub span: Span,
    pub construct: String,
    pub fatal: bool,
}

impl Finding {
    pub fn message(&self) -> String {
        format!("unsupported: {}", self.construct)
    }
}

/// Name of the construct a requirement flag announces, when unsupported.
fn requirement_construct(flag: &str) -> Option<String> {
    if SUPPORTED_REQUIREMENTS.contains(&flag) {
        return None;
    }
    Some(
        match flag {
            ":conditional-effects" => "conditional effect",
            ":disjunctive-preconditions" => "disjunction",
            ":existential-preconditions" => "existential quantifier",
            ":universal-preconditions" => "universal quantifier",
            ":quantified-preconditions" => "quantified condition",
            ":derived-predicates" => "derived predicate",
            ":numeric-fluents" | ":fluents" | ":object-fluents" => "numeric fluents",
            ":durative-actions" | ":duration-inequalities" | ":continuous-effects" | ":timed-initial-literals" => {
                "temporal construct"
            }
            ":action-costs" => "action costs",
            ":preferences" => "preference",
            ":constraints" => "trajectory constraint",
            other => return Some(format!("requirement {other}")),
        }
        .to_string(),
    )
}

fn section_construct(e: &SExpr) -> String {
    match e.head() {
        Some(":derived") => "derived predicate".into(),
        Some(":durative-action") => "temporal construct".into(),
        Some(":functions") => "numeric fluents".into(),
        Some(":constraints") => "trajectory constraint".into(),
        Some(":metric") => "plan metric".into(),
        Some(h) => format!("section {h}"),
        None => "section".into(),
    }
}

struct Lowering {
    findings: Vec<Finding>,
    part: Part,
}

impl Lowering {
    fn note(&mut self, span: Span, construct: impl Into<String>, fatal: bool) {
        self.findings.push(Finding { part: self.part, span, construct: construct.into(), fatal });
    }

    /// Conjunction of literals and equalities; other nodes are findings.
    fn condition(&mut self, f: &Formula, lits: &mut Vec<Literal>, eqs: &mut Vec<(Term, Term, bool)>) {
        match f {
            Formula::Atom(a) => lits.push(Literal { pred: a.pred.clone(), args: a.args.clone(), positive: true }),
            Formula::Equals(a, b, _) => eqs.push((a.clone(), b.clone(), true)),
            Formula::And(gs, _) => gs.iter().for_each(|g| self.condition(g, lits, eqs)),
            Formula::Not(g, s) => match &**g {
                Formula::Atom(a) => lits.push(Literal { pred: a.pred.clone(), args: a.args.clone(), positive: false }),
                Formula::Equals(a, b, _) => eqs.push((a.clone(), b.clone(), false)),
                Formula::Exists(..) => self.note(*s, "existential quantifier", true),
                Formula::Numeric(_) => self.note(*s, "numeric condition", true),
                other => self.condition(other, lits, eqs),
            },
            Formula::Or(_, s) => self.note(*s, "disjunction", true),
            Formula::Exists(_, _, s) => self.note(*s, "existential quantifier", true),
            Formula::Imply(_, _, s) => self.note(*s, "implication", true),
            Formula::Forall(_, _, s) => self.note(*s, "universal quantifier", true),
            Formula::Numeric(e) => self.note(e.span(), "numeric condition", true),
        }
    }

    fn effect(&mut self, e: &Effect, out: &mut Vec<Literal>) {
        match e {
            Effect::Add(a) => out.push(Literal { pred: a.pred.clone(), args: a.args.clone(), positive: true }),
            Effect::Del(a, _) => out.push(Literal { pred: a.pred.clone(), args: a.args.clone(), positive: false }),
            Effect::And(es, _) => es.iter().for_each(|e| self.effect(e, out)),
            Effect::Forall(_, _, s) => self.note(*s, "quantified effect", true),
            Effect::When(_, _, s) => self.note(*s, "conditional effect", true),
            Effect::Numeric(x) => self.note(x.span(), "numeric effect", true),
        }
    }
}

/// Lowers `ast` after normalizing it.
///
/// Returns every finding: fatal ones name constructs outside the fragment,
/// the rest name parts that carry no meaning here (unsupported requirement
/// flags, function declarations, metrics) and are skipped.
pub fn lower_all(ast: &PddlAst) -> (Option<SchemaTask>, Vec<Finding>) {
    let ast = normalize(ast);
    let d = &ast.domain;
    let p = &ast.problem;
    let mut lw = Lowering { findings: Vec::new(), part: Part::Domain };
    for r in &d.requirements {
        if let Some(c) = requirement_construct(r) {
            lw.note(Span::default(), c, false);
        }
    }
    for x in &d.extra {
        let fatal = !matches!(x.head(), Some(":functions"));
        lw.note(x.span(), section_construct(x), fatal);
    }
    let mut actions = Vec::new();
    for a in &d.actions {
        let mut pre = Vec::new();
        let mut eqs = Vec::new();
        if let Some(f) = &a.precondition {
            lw.condition(f, &mut pre, &mut eqs);
        }
        let mut effects = Vec::new();
        if let Some(e) = &a.effect {
            lw.effect(e, &mut effects);
        }
        actions.push(SchemaAction {
            name: a.name.clone(),
            params: a.params.iter().map(|n| (n.name.clone(), n.types.clone())).collect(),
            pre,
            equalities: eqs,
            effects,
        });
    }
    lw.part = Part::Problem;
    for r in &p.requirements {
        if let Some(c) = requirement_construct(r) {
            lw.note(Span::default(), c, false);
        }
    }
    for x in &p.extra {
        let fatal = !matches!(x.head(), Some(":metric"));
        lw.note(x.span(), section_construct(x), fatal);
    }
    let mut init = Vec::new();
    for it in &p.init {
        match it {
            InitItem::Atom(a) => init.push((a.pred.clone(), a.args.iter().map(Term::render).collect())),
            InitItem::Other(e) => {
                let what = match e.head() {
                    Some("=") => "numeric initial value",
                    Some("at") => "timed initial literal",
                    Some("not") => "negative initial literal",
                    _ => "initial state entry",
                };
                lw.note(e.span(), what, false);
            }
        }
    }
    let mut goal = Vec::new();
    let mut goal_eqs = Vec::new();
    lw.condition(&p.goal, &mut goal, &mut goal_eqs);
    if lw.findings.iter().any(|f| f.fatal) {
        return (None, lw.findings);
    }
    let mut types: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for t in &d.types {
        types.entry(t.name.clone()).or_default().extend(t.types.iter().cloned());
    }
    let mut objects: Vec<(String, Vec<String>)> = Vec::new();
    for o in d.constants.iter().chain(&p.objects) {
        match objects.iter_mut().find(|(n, _)| *n == o.name) {
            Some((_, ts)) => ts.extend(o.types.iter().cloned()),
            None => objects.push((o.name.clone(), o.types.clone())),
        }
    }
    let task = SchemaTask {
        predicates: d.predicates.iter().map(|p| (p.name.clone(), p.params.iter().map(|n| n.types.clone()).collect())).collect(),
        types,
        objects,
        actions,
        init,
        goal,
        goal_equalities: goal_eqs,
    };
    (Some(task), lw.findings)
}

/// Lowers `ast`, failing on the first construct outside the fragment.
pub fn lower_to_schemas(ast: &PddlAst) -> Result<(SchemaTask, Vec<Finding>), ResidualConstruct> {
    let (task, findings) = lower_all(ast);
    match task {
        Some(t) => Ok((t, findings)),
        None => {
            let f = findings.into_iter().find(|f| f.fatal).expect("a fatal finding blocks lowering");
            Err(ResidualConstruct { part: f.part, span: f.span, construct: f.construct })
        }
    }
}
