//! S-expressions to AST, then declaration checks across domain and problem.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::sexpr::{self, SExpr, Span};
use super::{ParseError, Part};

type R<T> = Result<T, ParseError>;

fn err<T>(span: Span, msg: impl Into<String>) -> R<T> {
    Err(ParseError::new(span, msg))
}

fn list<'a>(e: &'a SExpr, what: &str) -> R<&'a [SExpr]> {
    match e {
        SExpr::List(items, _) => Ok(items),
        SExpr::Atom(a, s) => err(*s, format!("expected {what}, found `{a}`")),
    }
}

fn atom<'a>(e: &'a SExpr, what: &str) -> R<&'a str> {
    match e {
        SExpr::Atom(a, _) => Ok(a),
        SExpr::List(_, s) => err(*s, format!("expected {what}, found a list")),
    }
}

fn name(e: &SExpr, what: &str) -> R<String> {
    let a = atom(e, what)?;
    if a.starts_with('?') || a.starts_with(':') || a == "-" {
        return err(e.span(), format!("expected {what}, found `{a}`"));
    }
    Ok(a.to_string())
}

/// `a b - t c - (either u v) d`; untyped names get `object`.
fn typed_list(items: &[SExpr], variables: bool) -> R<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Span)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let it = &items[i];
        if it.as_atom() == Some("-") {
            let Some(ty) = items.get(i + 1) else { return err(it.span(), "`-` without a type") };
            let types = match ty {
                SExpr::Atom(..) => vec![name(ty, "type name")?],
                SExpr::List(parts, s) => {
                    if parts.first().and_then(SExpr::as_atom) != Some("either") || parts.len() < 2 {
                        return err(*s, "expected a type or `(either ...)`");
                    }
                    parts[1..].iter().map(|p| name(p, "type name")).collect::<R<_>>()?
                }
            };
            if pending.is_empty() {
                return err(it.span(), "`-` without names before it");
            }
            out.extend(pending.drain(..).map(|(n, span)| TypedName { name: n, types: types.clone(), span }));
            i += 2;
            continue;
        }
        let a = atom(it, "name")?;
        let n = if variables {
            match a.strip_prefix('?') {
                Some(v) if !v.is_empty() => v.to_string(),
                _ => return err(it.span(), format!("expected a variable, found `{a}`")),
            }
        } else {
            name(it, "name")?
        };
        pending.push((n, it.span()));
        i += 1;
    }
    out.extend(pending.into_iter().map(|(n, span)| TypedName { name: n, types: vec!["object".into()], span }));
    Ok(out)
}

fn term(e: &SExpr) -> R<Term> {
    let a = atom(e, "term")?;
    match a.strip_prefix('?') {
        Some(v) if !v.is_empty() => Ok(Term::Var(v.to_string())),
        Some(_) => err(e.span(), "empty variable name"),
        None => Ok(Term::Const(name(e, "term")?)),
    }
}

fn atom_formula(e: &SExpr) -> R<Atom> {
    let items = list(e, "atom")?;
    let Some(head) = items.first() else { return err(e.span(), "empty atom") };
    let pred = name(head, "predicate name")?;
    let args = items[1..].iter().map(term).collect::<R<_>>()?;
    Ok(Atom { pred, args, span: e.span() })
}

fn arity(items: &[SExpr], n: usize, span: Span, what: &str) -> R<()> {
    if items.len() != n + 1 {
        return err(span, format!("`{what}` takes {n} argument(s), got {}", items.len() - 1));
    }
    Ok(())
}

const COMPARISONS: [&str; 4] = ["<", ">", "<=", ">="];

fn formula(e: &SExpr) -> R<Formula> {
    let span = e.span();
    let items = list(e, "formula")?;
    let Some(head) = items.first().and_then(SExpr::as_atom) else {
        if items.is_empty() {
            return Ok(Formula::And(Vec::new(), span));
        }
        return err(span, "formula must start with a symbol");
    };
    Ok(match head {
        "and" | "or" => {
            let parts = items[1..].iter().map(formula).collect::<R<_>>()?;
            if head == "and" {
                Formula::And(parts, span)
            } else {
                Formula::Or(parts, span)
            }
        }
        "not" => {
            arity(items, 1, span, "not")?;
            Formula::Not(Box::new(formula(&items[1])?), span)
        }
        "imply" => {
            arity(items, 2, span, "imply")?;
            Formula::Imply(Box::new(formula(&items[1])?), Box::new(formula(&items[2])?), span)
        }
        "forall" | "exists" => {
            arity(items, 2, span, head)?;
            let vars = typed_list(list(&items[1], "variable list")?, true)?;
            let body = Box::new(formula(&items[2])?);
            if head == "forall" {
                Formula::Forall(vars, body, span)
            } else {
                Formula::Exists(vars, body, span)
            }
        }
        "=" if items.len() == 3 && items[1..].iter().all(|i| i.as_atom().is_some()) => {
            let (a, b) = (term(&items[1])?, term(&items[2])?);
            if [&a, &b].iter().any(|t| matches!(t, Term::Const(c) if c.parse::<f64>().is_ok())) {
                Formula::Numeric(e.clone())
            } else {
                Formula::Equals(a, b, span)
            }
        }
        h if h == "=" || COMPARISONS.contains(&h) => Formula::Numeric(e.clone()),
        _ => Formula::Atom(atom_formula(e)?),
    })
}

const NUMERIC_EFFECTS: [&str; 5] = ["increase", "decrease", "assign", "scale-up", "scale-down"];

fn effect(e: &SExpr) -> R<Effect> {
    let span = e.span();
    let items = list(e, "effect")?;
    let Some(head) = items.first().and_then(SExpr::as_atom) else {
        if items.is_empty() {
            return Ok(Effect::And(Vec::new(), span));
        }
        return err(span, "effect must start with a symbol");
    };
    Ok(match head {
        "and" => Effect::And(items[1..].iter().map(effect).collect::<R<_>>()?, span),
        "not" => {
            arity(items, 1, span, "not")?;
            Effect::Del(atom_formula(&items[1])?, span)
        }
        "forall" => {
            arity(items, 2, span, "forall")?;
            let vars = typed_list(list(&items[1], "variable list")?, true)?;
            Effect::Forall(vars, Box::new(effect(&items[2])?), span)
        }
        "when" => {
            arity(items, 2, span, "when")?;
            Effect::When(formula(&items[1])?, Box::new(effect(&items[2])?), span)
        }
        h if NUMERIC_EFFECTS.contains(&h) => Effect::Numeric(e.clone()),
        _ => Effect::Add(atom_formula(e)?),
    })
}

/// `(define (<kind> <name>) section...)`, returning the name and sections.
fn define<'a>(e: &'a SExpr, kind: &str) -> R<(String, &'a [SExpr])> {
    let items = list(e, "`(define ...)`")?;
    if items.first().and_then(SExpr::as_atom) != Some("define") {
        return err(e.span(), "expected `(define ...)`");
    }
    let Some(header) = items.get(1) else { return err(e.span(), format!("missing `({kind} <name>)`")) };
    let h = list(header, "header")?;
    if h.len() != 2 || h[0].as_atom() != Some(kind) {
        return err(header.span(), format!("expected `({kind} <name>)`"));
    }
    Ok((name(&h[1], "name")?, &items[2..]))
}

fn section(e: &SExpr) -> R<(&str, &[SExpr])> {
    let items = list(e, "section")?;
    match items.first().and_then(SExpr::as_atom) {
        Some(k) if k.starts_with(':') => Ok((k, &items[1..])),
        _ => err(e.span(), "expected a `(:section ...)`"),
    }
}

fn requirements(items: &[SExpr]) -> R<Vec<String>> {
    items
        .iter()
        .map(|r| match atom(r, "requirement")? {
            k if k.starts_with(':') => Ok(k.to_string()),
            k => err(r.span(), format!("requirement `{k}` must start with `:`")),
        })
        .collect()
}

fn action(span: Span, items: &[SExpr]) -> R<ActionSchema> {
    let Some(n) = items.first() else { return err(span, "action without a name") };
    let mut a = ActionSchema { name: name(n, "action name")?, params: Vec::new(), precondition: None, effect: None, span };
    let mut i = 1;
    while i < items.len() {
        let key = atom(&items[i], "action keyword")?;
        let Some(val) = items.get(i + 1) else { return err(items[i].span(), format!("`{key}` without a value")) };
        match key {
            ":parameters" => a.params = typed_list(list(val, "parameter list")?, true)?,
            ":precondition" => a.precondition = Some(formula(val)?),
            ":effect" => a.effect = Some(effect(val)?),
            _ => return err(items[i].span(), format!("unknown action keyword `{key}`")),
        }
        i += 2;
    }
    Ok(a)
}

pub fn parse_domain(text: &str) -> Result<Domain, ParseError> {
    parse_domain_inner(text).map_err(|e| e.in_part(Part::Domain))
}

fn parse_domain_inner(text: &str) -> R<Domain> {
    let e = sexpr::read(text)?;
    let (dname, sections) = define(&e, "domain")?;
    let mut d = Domain {
        name: dname,
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
        extra: Vec::new(),
    };
    for s in sections {
        let (key, body) = section(s)?;
        match key {
            ":requirements" => d.requirements.extend(requirements(body)?),
            ":types" => d.types.extend(typed_list(body, false)?),
            ":constants" => d.constants.extend(typed_list(body, false)?),
            ":predicates" => {
                for p in body {
                    let items = list(p, "predicate declaration")?;
                    let Some(n) = items.first() else { return err(p.span(), "empty predicate declaration") };
                    d.predicates.push(Predicate {
                        name: name(n, "predicate name")?,
                        params: typed_list(&items[1..], true)?,
                        span: p.span(),
                    });
                }
            }
            ":action" => d.actions.push(action(s.span(), body)?),
            _ => d.extra.push(s.clone()),
        }
    }
    Ok(d)
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    parse_problem_inner(text).map_err(|e| e.in_part(Part::Problem))
}

fn parse_problem_inner(text: &str) -> R<Problem> {
    let e = sexpr::read(text)?;
    let (pname, sections) = define(&e, "problem")?;
    let mut p = Problem {
        name: pname,
        domain: String::new(),
        requirements: Vec::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Formula::truth(),
        extra: Vec::new(),
    };
    let mut saw_domain = false;
    let mut saw_goal = false;
    for s in sections {
        let (key, body) = section(s)?;
        match key {
            ":domain" => {
                let [d] = body else { return err(s.span(), "expected `(:domain <name>)`") };
                p.domain = name(d, "domain name")?;
                saw_domain = true;
            }
            ":requirements" => p.requirements.extend(requirements(body)?),
            ":objects" => p.objects.extend(typed_list(body, false)?),
            ":init" => {
                for it in body {
                    let is_atom = it.head().is_some_and(|h| !matches!(h, "=" | "at" | "not"))
                        && it.as_list().unwrap()[1..].iter().all(|a| a.as_atom().is_some());
                    p.init.push(if is_atom { InitItem::Atom(atom_formula(it)?) } else { InitItem::Other(it.clone()) });
                }
            }
            ":goal" => {
                let [g] = body else { return err(s.span(), "expected `(:goal <formula>)`") };
                p.goal = formula(g)?;
                saw_goal = true;
            }
            _ => p.extra.push(s.clone()),
        }
    }
    if !saw_domain {
        return err(e.span(), "problem lacks `(:domain <name>)`");
    }
    if !saw_goal {
        return err(e.span(), "problem lacks `(:goal ...)`");
    }
    Ok(p)
}

/// Parses both files and checks every reference across them.
pub fn parse_pddl(domain_text: &str, problem_text: &str) -> Result<PddlAst, ParseError> {
    let domain = parse_domain(domain_text)?;
    let problem = parse_problem(problem_text)?;
    let ast = PddlAst { domain, problem };
    check_declarations(&ast)?;
    Ok(ast)
}

struct Scope<'a> {
    preds: HashMap<&'a str, usize>,
    types: HashSet<&'a str>,
    objects: HashSet<&'a str>,
    part: Part,
}

impl Scope<'_> {
    fn fail<T>(&self, span: Span, msg: String) -> R<T> {
        Err(ParseError::new(span, msg).in_part(self.part))
    }

    fn types(&self, names: &[TypedName]) -> R<()> {
        for n in names {
            for t in &n.types {
                if !self.types.contains(t.as_str()) {
                    return self.fail(n.span, format!("undeclared type `{t}`"));
                }
            }
        }
        Ok(())
    }

    fn term(&self, t: &Term, vars: &[String], span: Span) -> R<()> {
        match t {
            Term::Var(v) if !vars.contains(v) => self.fail(span, format!("unbound variable `?{v}`")),
            Term::Const(c) if !self.objects.contains(c.as_str()) => self.fail(span, format!("undeclared object `{c}`")),
            _ => Ok(()),
        }
    }

    fn atom(&self, a: &Atom, vars: &[String]) -> R<()> {
        match self.preds.get(a.pred.as_str()) {
            None => return self.fail(a.span, format!("undeclared predicate `{}`", a.pred)),
            Some(&n) if n != a.args.len() => {
                return self.fail(a.span, format!("predicate `{}` takes {n} argument(s), got {}", a.pred, a.args.len()))
            }
            _ => {}
        }
        a.args.iter().try_for_each(|t| self.term(t, vars, a.span))
    }

    fn bind(&self, vars: &[String], more: &[TypedName]) -> R<Vec<String>> {
        self.types(more)?;
        let mut v = vars.to_vec();
        v.extend(more.iter().map(|n| n.name.clone()));
        Ok(v)
    }

    fn formula(&self, f: &Formula, vars: &[String]) -> R<()> {
        match f {
            Formula::Atom(a) => self.atom(a, vars),
            Formula::Equals(a, b, s) => {
                self.term(a, vars, *s)?;
                self.term(b, vars, *s)
            }
            Formula::Not(g, _) => self.formula(g, vars),
            Formula::And(gs, _) | Formula::Or(gs, _) => gs.iter().try_for_each(|g| self.formula(g, vars)),
            Formula::Imply(a, b, _) => {
                self.formula(a, vars)?;
                self.formula(b, vars)
            }
            Formula::Forall(vs, g, _) | Formula::Exists(vs, g, _) => self.formula(g, &self.bind(vars, vs)?),
            Formula::Numeric(_) => Ok(()),
        }
    }

    fn effect(&self, e: &Effect, vars: &[String]) -> R<()> {
        match e {
            Effect::Add(a) | Effect::Del(a, _) => self.atom(a, vars),
            Effect::And(es, _) => es.iter().try_for_each(|e| self.effect(e, vars)),
            Effect::Forall(vs, e, _) => self.effect(e, &self.bind(vars, vs)?),
            Effect::When(c, e, _) => {
                self.formula(c, vars)?;
                self.effect(e, vars)
            }
            Effect::Numeric(_) => Ok(()),
        }
    }
}

fn check_type_hierarchy(d: &Domain) -> R<()> {
    let parents: HashMap<&str, Vec<&str>> =
        d.types.iter().map(|t| (t.name.as_str(), t.types.iter().map(String::as_str).collect())).collect();
    for t in &d.types {
        let mut seen = HashSet::new();
        let mut stack = vec![t.name.as_str()];
        while let Some(x) = stack.pop() {
            for &p in parents.get(x).map(Vec::as_slice).unwrap_or(&[]) {
                if p == t.name {
                    return Err(ParseError::new(t.span, format!("type `{}` is its own ancestor", t.name)).in_part(Part::Domain));
                }
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
    }
    Ok(())
}

fn check_declarations(ast: &PddlAst) -> R<()> {
    let d = &ast.domain;
    let p = &ast.problem;
    if p.domain != d.name {
        return Err(ParseError::new(Span::default(), format!("problem is for domain `{}`, not `{}`", p.domain, d.name))
            .in_part(Part::Problem));
    }
    let mut types: HashSet<&str> = d.types.iter().map(|t| t.name.as_str()).collect();
    types.insert("object");
    let mut scope = Scope {
        preds: d.predicates.iter().map(|p| (p.name.as_str(), p.params.len())).collect(),
        types,
        objects: d.constants.iter().map(|c| c.name.as_str()).collect(),
        part: Part::Domain,
    };
    scope.types(&d.types)?;
    check_type_hierarchy(d)?;
    scope.types(&d.constants)?;
    for pr in &d.predicates {
        scope.types(&pr.params)?;
    }
    for a in &d.actions {
        let vars = scope.bind(&[], &a.params)?;
        if let Some(f) = &a.precondition {
            scope.formula(f, &vars)?;
        }
        if let Some(e) = &a.effect {
            scope.effect(e, &vars)?;
        }
    }
    scope.part = Part::Problem;
    scope.types(&p.objects)?;
    scope.objects.extend(p.objects.iter().map(|o| o.name.as_str()));
    for it in &p.init {
        if let InitItem::Atom(a) = it {
            scope.atom(a, &[])?;
        }
    }
    scope.formula(&p.goal, &[])
}
