use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use stepwise_frontend::pddl::{
    beautify, check_syntax, lower_all, lower_to_schemas, normalize, normalize_formula, parse_domain, parse_pddl,
    parse_problem, Atom, Formula, Part, Severity, Span, Term, TypedName,
};

const BW_DOMAIN: &str = include_str!("data/blocks-domain.pddl");
const BW_4: &str = include_str!("data/blocks-4.pddl");
const SW_DOMAIN: &str = include_str!("data/switches-domain.pddl");
const SW_PROBLEM: &str = include_str!("data/switches-problem.pddl");

fn problem(domain: &str, body: &str) -> String {
    format!("(define (problem p) (:domain {domain}) {body})")
}

#[test]
fn unbalanced_paren_reports_position() {
    let err = parse_domain("(define (domain d)\n  (:predicates (p))\n  (:action a :parameters () :effect (p))))").unwrap_err();
    assert_eq!((err.span.line, err.span.col), (3, 42), "{err}");
}

#[test]
fn unclosed_paren_reports_opening_position() {
    let err = parse_domain("(define (domain d)\n  (:predicates (p)\n").unwrap_err();
    assert!(err.span.line >= 1, "{err}");
    assert!(err.message.contains("unclosed") || err.message.contains("end of input"), "{err}");
}

#[test]
fn undeclared_predicate_points_at_use() {
    let d = "(define (domain d)\n (:predicates (p))\n (:action a :parameters ()\n   :precondition (q)\n   :effect (p)))";
    let err = parse_domain(d).map(|_| ()).and_then(|_| parse_pddl(d, &problem("d", "(:init) (:goal (p))")).map(|_| ()));
    let err = err.unwrap_err();
    assert_eq!(err.part, Part::Domain);
    assert_eq!(err.span.line, 4, "{err}");
    assert!(err.message.contains('q'), "{err}");
}

#[test]
fn wrong_arity_and_unbound_variable_are_errors() {
    let d = "(define (domain d) (:predicates (p ?x)) (:action a :parameters (?x) :effect (p)))";
    assert!(parse_pddl(d, &problem("d", "(:init) (:goal (and))")).is_err());
    let d = "(define (domain d) (:predicates (p ?x)) (:action a :parameters () :effect (p ?y)))";
    assert!(parse_pddl(d, &problem("d", "(:init) (:goal (and))")).is_err());
}

#[test]
fn problem_errors_carry_the_problem_part() {
    let err = parse_pddl(BW_DOMAIN, &problem("blocksworld", "(:objects a - block)\n(:init (clear z))\n(:goal (and))")).unwrap_err();
    assert_eq!(err.part, Part::Problem);
    assert_eq!(err.span.line, 2, "{err}");
    let err = parse_pddl(BW_DOMAIN, &problem("other", "(:init) (:goal (and))")).unwrap_err();
    assert_eq!(err.part, Part::Problem);
}

#[test]
fn unsupported_requirement_is_recorded_not_rejected() {
    let d = "(define (domain d) (:requirements :strips :derived-predicates) (:predicates (p)) (:action a :parameters () :effect (p)))";
    let ast = parse_pddl(d, &problem("d", "(:init) (:goal (p))")).unwrap();
    assert!(ast.domain.requirements.iter().any(|r| r == ":derived-predicates"));
    let (_, findings) = lower_all(&ast);
    assert!(findings.iter().any(|f| f.construct == "derived predicate" && !f.fatal));
}

fn atom(p: &str) -> Formula {
    Formula::Atom(Atom { pred: p.into(), args: vec![], span: Span::default() })
}
fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f), Span::default())
}
fn and(fs: Vec<Formula>) -> Formula {
    Formula::And(fs, Span::default())
}
fn or(fs: Vec<Formula>) -> Formula {
    Formula::Or(fs, Span::default())
}
fn imply(a: Formula, b: Formula) -> Formula {
    Formula::Imply(Box::new(a), Box::new(b), Span::default())
}
fn typed(v: &str) -> TypedName {
    TypedName { name: v.into(), types: vec!["object".into()], span: Span::default() }
}

#[test]
fn normalize_examples() {
    assert_eq!(normalize_formula(&imply(atom("p"), atom("q"))), or(vec![not(atom("p")), atom("q")]));
    assert_eq!(normalize_formula(&not(and(vec![atom("p"), not(atom("q"))]))), or(vec![not(atom("p")), atom("q")]));
    assert_eq!(normalize_formula(&and(vec![atom("p"), and(vec![atom("q"), atom("r")])])), and(vec![atom("p"), atom("q"), atom("r")]));
    assert_eq!(normalize_formula(&and(vec![atom("p")])), atom("p"));
    assert_eq!(normalize_formula(&not(not(atom("p")))), atom("p"));
    let fa = Formula::Forall(vec![typed("x")], Box::new(atom("p")), Span::default());
    let ex = Formula::Exists(vec![typed("x")], Box::new(not(atom("p"))), Span::default());
    assert_eq!(normalize_formula(&fa), not(ex));
}

#[test]
fn normalize_leaves_strips_actions_alone() {
    let ast = parse_pddl(BW_DOMAIN, BW_4).unwrap();
    assert_eq!(normalize(&ast), ast);
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        (0..3usize, proptest::collection::vec(0..3usize, 0..2)).prop_map(|(p, args)| Formula::Atom(Atom {
            pred: ["p", "q", "r"][p].into(),
            args: args.into_iter().map(|v| Term::Var(["x", "y", "z"][v].into())).collect(),
            span: Span::default(),
        })),
        (0..3usize, 0..3usize).prop_map(|(a, b)| Formula::Equals(
            Term::Var(["x", "y", "z"][a].into()),
            Term::Const(["c", "d", "e"][b].into()),
            Span::default()
        )),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(not),
            proptest::collection::vec(inner.clone(), 0..3).prop_map(and),
            proptest::collection::vec(inner.clone(), 0..3).prop_map(or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| imply(a, b)),
            (0..3usize, inner.clone())
                .prop_map(|(v, f)| Formula::Forall(vec![typed(["x", "y", "z"][v])], Box::new(f), Span::default())),
            (0..3usize, inner).prop_map(|(v, f)| Formula::Exists(vec![typed(["x", "y", "z"][v])], Box::new(f), Span::default())),
        ]
    })
}

fn free_vars(f: &Formula) -> BTreeSet<String> {
    fn term(t: &Term, out: &mut BTreeSet<String>) {
        if let Term::Var(v) = t {
            out.insert(v.clone());
        }
    }
    let mut out = BTreeSet::new();
    match f {
        Formula::Atom(a) => a.args.iter().for_each(|t| term(t, &mut out)),
        Formula::Equals(a, b, _) => {
            term(a, &mut out);
            term(b, &mut out);
        }
        Formula::Not(g, _) => out = free_vars(g),
        Formula::And(gs, _) | Formula::Or(gs, _) => gs.iter().for_each(|g| out.extend(free_vars(g))),
        Formula::Imply(a, b, _) => {
            out = free_vars(a);
            out.extend(free_vars(b));
        }
        Formula::Forall(vs, g, _) | Formula::Exists(vs, g, _) => {
            out = free_vars(g);
            for v in vs {
                out.remove(&v.name);
            }
        }
        Formula::Numeric(_) => {}
    }
    out
}

/// Evaluates over a two-element universe with a fixed interpretation.
fn eval(f: &Formula, env: &HashMap<String, &'static str>, interp: u64) -> bool {
    let val = |t: &Term| match t {
        Term::Var(v) => env.get(v).copied().unwrap_or("c"),
        Term::Const(c) => match c.as_str() {
            "c" => "c",
            "d" => "d",
            _ => "e",
        },
    };
    match f {
        Formula::Atom(a) => {
            let mut h: u64 = match a.pred.as_str() {
                "p" => 1,
                "q" => 2,
                _ => 3,
            };
            for t in &a.args {
                h = h * 7 + val(t).as_bytes()[0] as u64;
            }
            interp >> (h % 61) & 1 == 1
        }
        Formula::Equals(a, b, _) => val(a) == val(b),
        Formula::Not(g, _) => !eval(g, env, interp),
        Formula::And(gs, _) => gs.iter().all(|g| eval(g, env, interp)),
        Formula::Or(gs, _) => gs.iter().any(|g| eval(g, env, interp)),
        Formula::Imply(a, b, _) => !eval(a, env, interp) || eval(b, env, interp),
        Formula::Forall(vs, g, _) | Formula::Exists(vs, g, _) => {
            let universal = matches!(f, Formula::Forall(..));
            let mut envs = vec![env.clone()];
            for v in vs {
                envs = envs
                    .into_iter()
                    .flat_map(|e| ["c", "d"].map(|o| {
                        let mut e = e.clone();
                        e.insert(v.name.clone(), o);
                        e
                    }))
                    .collect();
            }
            if universal {
                envs.iter().all(|e| eval(g, e, interp))
            } else {
                envs.iter().any(|e| eval(g, e, interp))
            }
        }
        Formula::Numeric(_) => false,
    }
}

fn in_nnf(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) | Formula::Equals(..) => true,
        Formula::Not(g, _) => match &**g {
            Formula::Atom(_) | Formula::Equals(..) => true,
            Formula::Exists(_, b, _) => in_nnf(b),
            _ => false,
        },
        Formula::And(gs, _) => gs.len() != 1 && gs.iter().all(|g| !matches!(g, Formula::And(..)) && in_nnf(g)),
        Formula::Or(gs, _) => gs.len() != 1 && gs.iter().all(|g| !matches!(g, Formula::Or(..)) && in_nnf(g)),
        Formula::Exists(_, g, _) => in_nnf(g),
        Formula::Imply(..) | Formula::Forall(..) | Formula::Numeric(_) => false,
    }
}

proptest! {
    #[test]
    fn normalize_is_idempotent(f in arb_formula()) {
        let once = normalize_formula(&f);
        prop_assert_eq!(normalize_formula(&once), once);
    }

    #[test]
    fn normalize_preserves_free_variables(f in arb_formula()) {
        prop_assert_eq!(free_vars(&normalize_formula(&f)), free_vars(&f));
    }

    #[test]
    fn normalize_yields_negation_normal_form(f in arb_formula()) {
        prop_assert!(in_nnf(&normalize_formula(&f)));
    }

    #[test]
    fn normalize_preserves_truth(f in arb_formula(), interp in any::<u64>(), x in 0..2usize, y in 0..2usize, z in 0..2usize) {
        let env: HashMap<String, &'static str> =
            [("x", x), ("y", y), ("z", z)].into_iter().map(|(v, i)| (v.to_string(), ["c", "d"][i])).collect();
        prop_assert_eq!(eval(&normalize_formula(&f), &env, interp), eval(&f, &env, interp));
    }
}

#[test]
fn beautify_round_trips() {
    let inputs = [
        (BW_DOMAIN, BW_4),
        (SW_DOMAIN, SW_PROBLEM),
        (include_str!("data/example-domain.pddl"), include_str!("data/example-problem.pddl")),
    ];
    for (d, p) in inputs {
        let ast = parse_pddl(d, p).unwrap();
        let (d2, p2) = beautify(&ast);
        let again = parse_pddl(&d2, &p2).unwrap_or_else(|e| panic!("{e}\n{d2}\n{p2}"));
        assert_eq!(again, ast);
        assert_eq!(beautify(&again), (d2, p2), "beautify is a fixpoint");
    }
}

#[test]
fn beautify_keeps_mixed_typed_runs() {
    let d = "(define (domain t) (:requirements :typing) (:types car - vehicle vehicle)
      (:predicates (at ?v - vehicle ?p)) (:action go :parameters (?p - object ?v - vehicle ?q) :effect (at ?v ?q)))";
    let p = "(define (problem t1) (:domain t) (:objects l1 l2 c1 - car) (:init (at c1 l1)) (:goal (at c1 l2)))";
    let ast = parse_pddl(d, p).unwrap();
    let (d2, p2) = beautify(&ast);
    assert_eq!(parse_pddl(&d2, &p2).unwrap(), ast, "{d2}");
    let types: Vec<Vec<String>> = parse_domain(&d2).unwrap().actions[0].params.iter().map(|p| p.types.clone()).collect();
    assert_eq!(types, [["object"], ["vehicle"], ["object"]].map(|t| t.map(String::from).to_vec()));
    assert_eq!(parse_problem(&p2).unwrap().objects.len(), 3);
}

#[test]
fn check_syntax_is_silent_on_strips() {
    assert!(check_syntax(BW_DOMAIN, BW_4).is_empty());
    assert!(check_syntax(include_str!("data/example-domain.pddl"), include_str!("data/example-problem.pddl")).is_empty());
}

#[test]
fn check_syntax_names_the_conditional_effect_once() {
    let diags = check_syntax(SW_DOMAIN, SW_PROBLEM);
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert_eq!(diags[0].severity, Severity::Warning);
    assert_eq!(diags[0].message, "unsupported: conditional effect");
    let line = diags[0].render("d.pddl", "p.pddl");
    assert!(line.starts_with("d.pddl:") && line.ends_with("warning: unsupported: conditional effect"), "{line}");
}

#[test]
fn check_syntax_reports_parse_error_with_position() {
    let diags = check_syntax("(define (domain d)\n (:predicates (p))", "(define (problem p) (:domain d) (:goal (p)))");
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].severity, Severity::Error);
    assert!(diags[0].render("d.pddl", "p.pddl").starts_with("d.pddl:"));
}

fn lower_error(pre: &str) -> String {
    let d = format!(
        "(define (domain d) (:requirements :strips :negative-preconditions) (:predicates (p ?x) (q))
           (:action a :parameters (?x) :precondition {pre} :effect (q)))"
    );
    let ast = parse_pddl(&d, &problem("d", "(:objects o) (:init) (:goal (q))")).unwrap();
    lower_to_schemas(&ast).map(|_| ()).unwrap_err().construct
}

#[test]
fn lowering_rejects_disjunction_and_existentials() {
    assert_eq!(lower_error("(or (p ?x) (q))"), "disjunction");
    assert_eq!(lower_error("(exists (?y) (p ?y))"), "existential quantifier");
    assert_eq!(lower_error("(forall (?y) (p ?y))"), "existential quantifier");
}

#[test]
fn conditional_effect_is_fatal_for_lowering() {
    let ast = parse_pddl(SW_DOMAIN, SW_PROBLEM).unwrap();
    let err = lower_to_schemas(&ast).unwrap_err();
    assert_eq!(err.construct, "conditional effect");
    assert_eq!(err.part, Part::Domain);
}

#[test]
fn negative_precondition_lowers_to_false_literal() {
    let ast = parse_pddl(include_str!("data/example-domain.pddl"), include_str!("data/example-problem.pddl")).unwrap();
    let (st, findings) = lower_to_schemas(&ast).unwrap();
    assert!(findings.is_empty());
    let a1 = st.actions.iter().find(|a| a.name == "a1").unwrap();
    assert_eq!(a1.pre.len(), 1);
    assert_eq!((a1.pre[0].pred.as_str(), a1.pre[0].positive), ("x1", false));
}
