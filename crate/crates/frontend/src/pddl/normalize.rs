//! Implications become disjunctions, universal quantifiers become negated
//! existentials, negation moves inwards and nested connectives flatten.

use super::ast::{ActionSchema, Effect, Formula, PddlAst};

pub fn normalize(ast: &PddlAst) -> PddlAst {
    let mut out = ast.clone();
    for a in &mut out.domain.actions {
        normalize_action(a);
    }
    out.problem.goal = normalize_formula(&out.problem.goal);
    out
}

fn normalize_action(a: &mut ActionSchema) {
    if let Some(f) = &a.precondition {
        a.precondition = Some(normalize_formula(f));
    }
    if let Some(e) = &a.effect {
        a.effect = Some(normalize_effect(e));
    }
}

fn normalize_effect(e: &Effect) -> Effect {
    match e {
        Effect::And(es, s) => {
            let mut flat = Vec::new();
            for e in es {
                match normalize_effect(e) {
                    Effect::And(inner, _) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            if flat.len() == 1 {
                flat.pop().unwrap()
            } else {
                Effect::And(flat, *s)
            }
        }
        Effect::Forall(vs, e, s) => Effect::Forall(vs.clone(), Box::new(normalize_effect(e)), *s),
        Effect::When(c, e, s) => Effect::When(normalize_formula(c), Box::new(normalize_effect(e)), *s),
        other => other.clone(),
    }
}

pub fn normalize_formula(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, negated: bool) -> Formula {
    let lit = |f: &Formula| if negated { Formula::Not(Box::new(f.clone()), f.span()) } else { f.clone() };
    match f {
        Formula::Atom(_) | Formula::Equals(..) | Formula::Numeric(_) => lit(f),
        Formula::Not(g, _) => nnf(g, !negated),
        Formula::And(gs, s) | Formula::Or(gs, s) => {
            let conj = matches!(f, Formula::And(..)) != negated;
            let parts = gs.iter().map(|g| nnf(g, negated)).collect();
            junction(conj, parts, *s)
        }
        Formula::Imply(a, b, s) => {
            let or = Formula::Or(vec![Formula::Not(a.clone(), *s), (**b).clone()], *s);
            nnf(&or, negated)
        }
        Formula::Forall(vs, g, s) => {
            let ex = Formula::Exists(vs.clone(), Box::new(Formula::Not(g.clone(), *s)), *s);
            nnf(&ex, !negated)
        }
        Formula::Exists(vs, g, s) => {
            let ex = Formula::Exists(vs.clone(), Box::new(nnf(g, false)), *s);
            if negated {
                Formula::Not(Box::new(ex), *s)
            } else {
                ex
            }
        }
    }
}

fn junction(conj: bool, parts: Vec<Formula>, s: super::sexpr::Span) -> Formula {
    let mut flat = Vec::new();
    for p in parts {
        match p {
            Formula::And(inner, _) if conj => flat.extend(inner),
            Formula::Or(inner, _) if !conj => flat.extend(inner),
            other => flat.push(other),
        }
    }
    if flat.len() == 1 {
        return flat.pop().unwrap();
    }
    if conj {
        Formula::And(flat, s)
    } else {
        Formula::Or(flat, s)
    }
}
