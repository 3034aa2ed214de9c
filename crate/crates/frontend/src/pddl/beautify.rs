//! Canonical PDDL text: two-space indentation, one element group per line
//! inside each top-level section, formulas on a single line.

use std::fmt::Write;

use super::ast::*;

/// Consecutive runs of names sharing a type, each rendered `a b - t`. An
/// untyped run drops `- object` only when it is the last one, since a later
/// `- t` would otherwise claim it.
fn runs(names: &[TypedName], variables: bool) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < names.len() {
        let mut j = i;
        while j + 1 < names.len() && names[j + 1].types == names[i].types {
            j += 1;
        }
        let mut parts: Vec<String> =
            names[i..=j].iter().map(|n| if variables { format!("?{}", n.name) } else { n.name.clone() }).collect();
        let last = j + 1 == names.len();
        match names[i].types.as_slice() {
            [t] if t == "object" && last => {}
            [t] => parts.push(format!("- {t}")),
            ts => parts.push(format!("- (either {})", ts.join(" "))),
        }
        out.push(parts.join(" "));
        i = j + 1;
    }
    out
}

fn typed(names: &[TypedName], variables: bool) -> String {
    runs(names, variables).join(" ")
}

fn atom(a: &Atom) -> String {
    let mut s = format!("({}", a.pred);
    for t in &a.args {
        s.push(' ');
        s.push_str(&t.render());
    }
    s.push(')');
    s
}

fn group(head: &str, parts: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("({head}");
    for p in parts {
        s.push(' ');
        s.push_str(&p);
    }
    s.push(')');
    s
}

pub fn formula(f: &Formula) -> String {
    match f {
        Formula::Atom(a) => atom(a),
        Formula::Equals(a, b, _) => format!("(= {} {})", a.render(), b.render()),
        Formula::Not(g, _) => format!("(not {})", formula(g)),
        Formula::And(gs, _) => group("and", gs.iter().map(formula)),
        Formula::Or(gs, _) => group("or", gs.iter().map(formula)),
        Formula::Imply(a, b, _) => format!("(imply {} {})", formula(a), formula(b)),
        Formula::Forall(vs, g, _) => format!("(forall ({}) {})", typed(vs, true), formula(g)),
        Formula::Exists(vs, g, _) => format!("(exists ({}) {})", typed(vs, true), formula(g)),
        Formula::Numeric(e) => e.to_string(),
    }
}

pub fn effect(e: &Effect) -> String {
    match e {
        Effect::Add(a) => atom(a),
        Effect::Del(a, _) => format!("(not {})", atom(a)),
        Effect::And(es, _) => group("and", es.iter().map(effect)),
        Effect::Forall(vs, e, _) => format!("(forall ({}) {})", typed(vs, true), effect(e)),
        Effect::When(c, e, _) => format!("(when {} {})", formula(c), effect(e)),
        Effect::Numeric(x) => x.to_string(),
    }
}

/// `(:key` then one item per line, closing on the last.
fn block(out: &mut String, key: &str, items: &[String]) {
    if items.is_empty() {
        let _ = writeln!(out, "  ({key})");
        return;
    }
    let _ = write!(out, "  ({key}");
    for it in items {
        let _ = write!(out, "\n    {it}");
    }
    out.push_str(")\n");
}

pub fn beautify_domain(d: &Domain) -> String {
    let mut out = format!("(define (domain {})\n", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        block(&mut out, ":types", &lines(&d.types));
    }
    if !d.constants.is_empty() {
        block(&mut out, ":constants", &lines(&d.constants));
    }
    if !d.predicates.is_empty() {
        let preds: Vec<String> = d
            .predicates
            .iter()
            .map(|p| {
                let params = typed(&p.params, true);
                if params.is_empty() {
                    format!("({})", p.name)
                } else {
                    format!("({} {params})", p.name)
                }
            })
            .collect();
        block(&mut out, ":predicates", &preds);
    }
    for x in &d.extra {
        let _ = writeln!(out, "  {x}");
    }
    for a in &d.actions {
        let _ = write!(out, "  (:action {}\n    :parameters ({})", a.name, typed(&a.params, true));
        if let Some(p) = &a.precondition {
            let _ = write!(out, "\n    :precondition {}", formula(p));
        }
        if let Some(e) = &a.effect {
            let _ = write!(out, "\n    :effect {}", effect(e));
        }
        out.push_str(")\n");
    }
    out.push_str(")\n");
    out
}

/// Typed list with each type run on its own line.
fn lines(names: &[TypedName]) -> Vec<String> {
    runs(names, false)
}

pub fn beautify_problem(p: &Problem) -> String {
    let mut out = format!("(define (problem {})\n  (:domain {})\n", p.name, p.domain);
    if !p.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", p.requirements.join(" "));
    }
    if !p.objects.is_empty() {
        block(&mut out, ":objects", &lines(&p.objects));
    }
    let init: Vec<String> = p
        .init
        .iter()
        .map(|i| match i {
            InitItem::Atom(a) => atom(a),
            InitItem::Other(e) => e.to_string(),
        })
        .collect();
    block(&mut out, ":init", &init);
    let _ = writeln!(out, "  (:goal {})", formula(&p.goal));
    for x in &p.extra {
        let _ = writeln!(out, "  {x}");
    }
    out.push_str(")\n");
    out
}

/// Domain text and problem text.
pub fn beautify(ast: &PddlAst) -> (String, String) {
    (beautify_domain(&ast.domain), beautify_problem(&ast.problem))
}
