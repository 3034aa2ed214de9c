use proptest::prelude::*;

use stepwise_engine::{Engine, Lit, Status, Var};

#[derive(Clone, Debug)]
struct Store {
    vars: usize,
    clauses: Vec<Vec<(usize, bool)>>,
    amos: Vec<Vec<(usize, bool)>>,
    edges: Vec<((usize, bool), u32, u32)>,
}

fn lit_strategy(vars: usize) -> impl Strategy<Value = (usize, bool)> {
    (0..vars, any::<bool>())
}

fn store_strategy() -> impl Strategy<Value = Store> {
    (2usize..=12).prop_flat_map(|vars| {
        (
            Just(vars),
            prop::collection::vec(prop::collection::vec(lit_strategy(vars), 1..4), 0..30),
            prop::collection::vec(prop::collection::vec(lit_strategy(vars), 2..11), 0..3),
            prop::collection::vec((lit_strategy(vars), 0u32..6, 0u32..6), 0..10),
        )
            .prop_map(|(vars, clauses, amos, edges)| Store { vars, clauses, amos, edges })
    })
}

fn holds(assign: u32, (v, pos): (usize, bool)) -> bool {
    (assign >> v & 1 == 1) == pos
}

fn acyclic(nodes: usize, edges: &[(u32, u32)]) -> bool {
    // Repeatedly strip nodes without incoming edges.
    let mut alive = vec![true; nodes];
    loop {
        let mut changed = false;
        for n in 0..nodes {
            if alive[n] && !edges.iter().any(|&(f, t)| t as usize == n && alive[f as usize]) {
                alive[n] = false;
                changed = true;
            }
        }
        if !changed {
            return alive.iter().all(|a| !a);
        }
    }
}

fn satisfies(store: &Store, assign: u32) -> bool {
    store.clauses.iter().all(|c| c.iter().any(|&l| holds(assign, l)))
        && store.amos.iter().all(|g| g.iter().filter(|&&l| holds(assign, l)).count() <= 1)
        && {
            let active: Vec<(u32, u32)> = store.edges.iter().filter(|(l, _, _)| holds(assign, *l)).map(|&(_, f, t)| (f, t)).collect();
            acyclic(6, &active)
        }
}

fn models(store: &Store) -> Vec<u32> {
    (0..1u32 << store.vars).filter(|&a| satisfies(store, a)).collect()
}

fn to_lit(vars: &[Var], (v, pos): (usize, bool)) -> Lit {
    if pos { vars[v].pos() } else { vars[v].neg() }
}

fn build(store: &Store, seed: u64) -> (Engine, Vec<Var>) {
    let mut e = Engine::with_seed(seed);
    let vars: Vec<Var> = (0..store.vars).map(|_| e.new_var()).collect();
    for c in &store.clauses {
        let lits: Vec<Lit> = c.iter().map(|&l| to_lit(&vars, l)).collect();
        e.add_clause(&lits).unwrap();
    }
    for g in &store.amos {
        let lits: Vec<Lit> = g.iter().map(|&l| to_lit(&vars, l)).collect();
        e.add_amo(&lits).unwrap();
    }
    for &(l, f, t) in &store.edges {
        e.add_edge(to_lit(&vars, l), f, t).unwrap();
    }
    (e, vars)
}

fn assignment_of(model: &stepwise_engine::Model, vars: &[Var]) -> u32 {
    vars.iter().enumerate().fold(0, |acc, (i, &v)| acc | (model.value(v) as u32) << i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn verdict_matches_enumeration(store in store_strategy(), seed in any::<u64>()) {
        let expected = models(&store);
        let (mut e, vars) = build(&store, seed);
        let out = e.solve(&[], None);
        if expected.is_empty() {
            prop_assert_eq!(out.status, Status::Unsat);
        } else {
            prop_assert_eq!(out.status, Status::Sat);
            let a = assignment_of(out.model.as_ref().unwrap(), &vars);
            prop_assert!(expected.contains(&a));
        }
    }

    #[test]
    fn learnt_clauses_are_consequences(store in store_strategy(), assume in prop::collection::vec(lit_strategy(12), 0..4)) {
        let expected = models(&store);
        let (mut e, vars) = build(&store, 1);
        let assume: Vec<Lit> = assume.into_iter().filter(|&(v, _)| v < store.vars).map(|l| to_lit(&vars, l)).collect();
        e.solve(&assume, None);
        e.solve(&[], None);
        let index = |l: Lit| (l.var().0 as usize, l.is_positive());
        for a in &expected {
            for c in e.learnt_clauses() {
                // Clauses over auxiliary counter variables cannot be checked here.
                if c.iter().any(|l| l.var().index() >= store.vars) {
                    continue;
                }
                prop_assert!(c.iter().any(|&l| holds(*a, index(l))), "learnt {:?} cuts model {:b}", c, a);
            }
            for l in e.fixed_literals() {
                if l.var().index() < store.vars {
                    prop_assert!(holds(*a, index(l)));
                }
            }
        }
    }

    #[test]
    fn assumptions_match_enumeration(store in store_strategy(), rounds in prop::collection::vec(prop::collection::vec(lit_strategy(12), 0..4), 1..5)) {
        let (mut e, vars) = build(&store, 7);
        let all = models(&store);
        for r in rounds {
            let r: Vec<(usize, bool)> = r.into_iter().filter(|&(v, _)| v < store.vars).collect();
            let lits: Vec<Lit> = r.iter().map(|&l| to_lit(&vars, l)).collect();
            let sat = all.iter().any(|&a| r.iter().all(|&l| holds(a, l)));
            let out = e.solve(&lits, None);
            prop_assert_eq!(out.status, if sat { Status::Sat } else { Status::Unsat });
            if let Some(m) = out.model {
                prop_assert!(lits.iter().all(|&l| m.lit(l)));
            }
        }
    }

    #[test]
    fn hints_do_not_change_verdicts(store in store_strategy(), hints in prop::collection::vec((0usize..12, -5i64..50, prop::option::of(any::<bool>())), 0..8)) {
        let (mut plain, _) = build(&store, 3);
        let (mut hinted, vars) = build(&store, 3);
        for (v, level, phase) in hints {
            if v < store.vars {
                hinted.set_hint(vars[v], level, phase).unwrap();
            }
        }
        let watched = vars.clone();
        let n = vars.len();
        hinted.on_assign(&watched, move |l, sink| {
            let next = Var((l.var().0 + 1) % n as u32);
            sink.set_hint(next, 100 + l.var().0 as i64, Some(!l.is_positive()));
        }).unwrap();
        let a = plain.solve(&[], None).status;
        let b = hinted.solve(&[], None).status;
        prop_assert_eq!(a, b);
    }
}

/// Pigeonhole 7 into 6: needs many conflicts, so a budget of one stops early.
fn pigeonhole(e: &mut Engine, pigeons: usize, holes: usize) {
    let p: Vec<Vec<Var>> = (0..pigeons).map(|_| (0..holes).map(|_| e.new_var()).collect()).collect();
    for row in &p {
        let lits: Vec<Lit> = row.iter().map(|v| v.pos()).collect();
        e.add_clause(&lits).unwrap();
    }
    for h in 0..holes {
        let col: Vec<Lit> = p.iter().map(|row| row[h].pos()).collect();
        e.add_amo(&col).unwrap();
    }
}

#[test]
fn budget_of_one_conflict() {
    let mut e = Engine::new();
    pigeonhole(&mut e, 7, 6);
    let out = e.solve(&[], Some(1));
    assert_eq!(out.status, Status::BudgetExhausted);
    assert_eq!(out.stats.conflicts, 1);
    // State stays usable; an unlimited call settles it.
    assert_eq!(e.solve(&[], None).status, Status::Unsat);
}

#[test]
fn budgeted_calls_accumulate_to_a_verdict() {
    let mut e = Engine::new();
    pigeonhole(&mut e, 6, 5);
    let mut calls = 0;
    loop {
        calls += 1;
        match e.solve(&[], Some(16)).status {
            Status::BudgetExhausted => continue,
            s => {
                assert_eq!(s, Status::Unsat);
                break;
            }
        }
    }
    assert!(calls > 1);
}

#[test]
fn large_amo_uses_counter() {
    let mut e = Engine::new();
    let xs: Vec<Var> = (0..12).map(|_| e.new_var()).collect();
    let lits: Vec<Lit> = xs.iter().map(|v| v.pos()).collect();
    e.add_amo(&lits).unwrap();
    assert!(e.num_vars() > 12);
    assert_eq!(e.solve(&[xs[3].pos()], None).status, Status::Sat);
    assert_eq!(e.solve(&[xs[3].pos(), xs[11].pos()], None).status, Status::Unsat);
    let dimacs = e.to_dimacs();
    assert!(dimacs.contains("c amo 1 2 3"));
    assert!(dimacs.contains("p cnf "));
}

#[test]
fn long_cycle() {
    let mut e = Engine::new();
    let xs: Vec<Var> = (0..5).map(|_| e.new_var()).collect();
    for (i, x) in xs.iter().enumerate() {
        e.add_edge(x.pos(), i as u32, ((i + 1) % 5) as u32).unwrap();
    }
    let all: Vec<Lit> = xs.iter().map(|v| v.pos()).collect();
    assert_eq!(e.solve(&all, None).status, Status::Unsat);
    assert_eq!(e.solve(&all[..4], None).status, Status::Sat);
    assert!(e.to_dimacs().contains("c edge 1 0 1"));
}

#[test]
fn same_history_same_result() {
    let run = || {
        let mut e = Engine::with_seed(42);
        pigeonhole(&mut e, 5, 5);
        let out = e.solve(&[], None);
        (out.model, out.stats)
    };
    assert_eq!(run(), run());
}
