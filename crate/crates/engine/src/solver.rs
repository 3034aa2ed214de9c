use std::fmt::Write as _;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::heap::{Keys, VarHeap};
use crate::lit::{LBool, Lit, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("variable {0} is not registered")]
    UnregisteredVariable(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    BudgetExhausted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt: u64,
}

/// Total assignment returned on a satisfiable call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.values[l.var().index()] == l.is_positive()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: Status,
    pub model: Option<Model>,
    /// Counters for this call only.
    pub stats: Stats,
}

/// Branching preference for one variable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Hint {
    pub level: i64,
    pub phase: Option<bool>,
}

/// The only handle an assignment callback gets: it can reshape hints, nothing else.
pub struct HintSink<'a> {
    ops: &'a mut Vec<(Var, Hint)>,
}

impl HintSink<'_> {
    pub fn set_hint(&mut self, var: Var, level: i64, phase: Option<bool>) {
        self.ops.push((var, Hint { level, phase }));
    }

    pub fn clear_hint(&mut self, var: Var) {
        self.ops.push((var, Hint::default()));
    }
}

type Callback = Box<dyn FnMut(Lit, &mut HintSink<'_>)>;

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: Lit,
}

struct Edge {
    lit: Lit,
    from: u32,
    to: u32,
}

const NO_REASON: u32 = u32::MAX;
const RESTART_BASE: f64 = 64.0;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;

/// Conflict-driven clause-learning engine with assumptions, conflict
/// budgets, an acyclicity constraint over conditional edges, and
/// per-variable branching hints.
pub struct Engine {
    ok: bool,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarHeap,
    saved_phase: Vec<bool>,
    seen: Vec<bool>,

    hints: Vec<Hint>,
    hint_level: Vec<i64>,
    hint_undo: Vec<(usize, Var, Hint)>,
    hint_ops: Vec<(Var, Hint)>,
    callbacks: Vec<Callback>,
    var_callbacks: Vec<Vec<u32>>,

    edges: Vec<Edge>,
    edges_by_lit: Vec<Vec<u32>>,
    out_edges: Vec<Vec<u32>>,
    dfs_mark: Vec<u32>,
    dfs_stamp: u32,
    dfs_parent: Vec<u32>,

    amo_groups: Vec<Vec<Lit>>,
    original: usize,
    max_learnts: f64,
    rng: SmallRng,
    stats: Stats,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Self::with_seed(0)
    }

    /// The seed perturbs initial activities; equal seeds and equal call
    /// histories give identical runs.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            ok: true,
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarHeap::new(),
            saved_phase: Vec::new(),
            seen: Vec::new(),
            hints: Vec::new(),
            hint_level: Vec::new(),
            hint_undo: Vec::new(),
            hint_ops: Vec::new(),
            callbacks: Vec::new(),
            var_callbacks: Vec::new(),
            edges: Vec::new(),
            edges_by_lit: Vec::new(),
            out_edges: Vec::new(),
            dfs_mark: Vec::new(),
            dfs_stamp: 0,
            dfs_parent: Vec::new(),
            amo_groups: Vec::new(),
            original: 0,
            max_learnts: 4000.0,
            rng: SmallRng::seed_from_u64(seed),
            stats: Stats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(NO_REASON);
        self.activity.push(self.rng.gen::<f64>() * 1e-3);
        self.saved_phase.push(false);
        self.seen.push(false);
        self.hints.push(Hint::default());
        self.hint_level.push(0);
        self.var_callbacks.push(Vec::new());
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.edges_by_lit.push(Vec::new());
        self.edges_by_lit.push(Vec::new());
        self.order.grow(self.assigns.len());
        let keys = Keys { level: &self.hint_level, activity: &self.activity };
        self.order.insert(v.0, &keys);
        v
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    /// False once the store is unsatisfiable without any assumptions.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    fn check_lits(&self, lits: &[Lit]) -> Result<(), EngineError> {
        match lits.iter().find(|l| l.var().index() >= self.num_vars()) {
            Some(l) => Err(EngineError::UnregisteredVariable(l.var().0)),
            None => Ok(()),
        }
    }

    #[inline]
    fn value(&self, l: Lit) -> LBool {
        lit_value(&self.assigns, l)
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Permanent clause; only called between solves.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), EngineError> {
        self.check_lits(lits)?;
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return Ok(());
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return Ok(());
        }
        if c.iter().any(|&l| self.value(l) == LBool::True) {
            return Ok(());
        }
        c.retain(|&l| self.value(l) != LBool::False);
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c, false);
                self.original += 1;
            }
        }
        Ok(())
    }

    /// At most one of `lits` is true: pairwise up to eight literals,
    /// sequential counter with fresh auxiliaries above.
    pub fn add_amo(&mut self, lits: &[Lit]) -> Result<(), EngineError> {
        self.check_lits(lits)?;
        self.amo_groups.push(lits.to_vec());
        if lits.len() <= 8 {
            for i in 0..lits.len() {
                for j in i + 1..lits.len() {
                    self.add_clause(&[!lits[i], !lits[j]])?;
                }
            }
            return Ok(());
        }
        // s_i: some literal among the first i+1 is true.
        let n = lits.len();
        let s: Vec<Var> = (0..n - 1).map(|_| self.new_var()).collect();
        self.add_clause(&[!lits[0], s[0].pos()])?;
        for i in 1..n - 1 {
            self.add_clause(&[!lits[i], s[i].pos()])?;
            self.add_clause(&[s[i - 1].neg(), s[i].pos()])?;
            self.add_clause(&[!lits[i], s[i - 1].neg()])?;
        }
        self.add_clause(&[!lits[n - 1], s[n - 2].neg()])?;
        Ok(())
    }

    /// Edge `from -> to` that exists whenever `lit` is true; the graph of
    /// existing edges must stay acyclic.
    pub fn add_edge(&mut self, lit: Lit, from: u32, to: u32) -> Result<(), EngineError> {
        self.check_lits(&[lit])?;
        if from == to {
            return self.add_clause(&[!lit]);
        }
        let nodes = from.max(to) as usize + 1;
        if self.out_edges.len() < nodes {
            self.out_edges.resize(nodes, Vec::new());
            self.dfs_mark.resize(nodes, 0);
            self.dfs_parent.resize(nodes, u32::MAX);
        }
        let e = self.edges.len() as u32;
        self.edges.push(Edge { lit, from, to });
        self.edges_by_lit[lit.code()].push(e);
        self.out_edges[from as usize].push(e);
        if self.ok && self.value(lit) == LBool::True {
            if let Some(cycle) = self.find_cycle(e) {
                if cycle.iter().all(|l| self.level[l.var().index()] == 0) {
                    self.ok = false;
                }
            }
        }
        Ok(())
    }

    pub fn set_hint(&mut self, var: Var, level: i64, phase: Option<bool>) -> Result<(), EngineError> {
        self.check_lits(&[var.pos()])?;
        self.put_hint(var, Hint { level, phase });
        Ok(())
    }

    pub fn clear_hint(&mut self, var: Var) -> Result<(), EngineError> {
        self.set_hint(var, 0, None)
    }

    pub fn hint(&self, var: Var) -> Hint {
        self.hints[var.index()]
    }

    /// Calls `f` every time one of `vars` is assigned, by decision or by
    /// propagation. Hints it sets are undone when that assignment is.
    pub fn on_assign(&mut self, vars: &[Var], f: impl FnMut(Lit, &mut HintSink<'_>) + 'static) -> Result<(), EngineError> {
        let lits: Vec<Lit> = vars.iter().map(|v| v.pos()).collect();
        self.check_lits(&lits)?;
        let id = self.callbacks.len() as u32;
        self.callbacks.push(Box::new(f));
        for v in vars {
            self.var_callbacks[v.index()].push(id);
        }
        Ok(())
    }

    fn put_hint(&mut self, var: Var, h: Hint) {
        self.hints[var.index()] = h;
        if self.hint_level[var.index()] != h.level {
            self.hint_level[var.index()] = h.level;
            let keys = Keys { level: &self.hint_level, activity: &self.activity };
            self.order.update(var.0, &keys);
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watch { cref, blocker: lits[1] });
        self.watches[lits[1].code()].push(Watch { cref, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, activity: 0.0 });
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = if l.is_positive() { LBool::True } else { LBool::False };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
        if !self.var_callbacks[v].is_empty() {
            self.fire_callbacks(l);
        }
    }

    fn fire_callbacks(&mut self, l: Lit) {
        let at = self.trail.len() - 1;
        let v = l.var().index();
        for k in 0..self.var_callbacks[v].len() {
            let id = self.var_callbacks[v][k] as usize;
            let mut sink = HintSink { ops: &mut self.hint_ops };
            (self.callbacks[id])(l, &mut sink);
        }
        let ops = std::mem::take(&mut self.hint_ops);
        for &(var, h) in &ops {
            if var.index() >= self.num_vars() {
                continue;
            }
            self.hint_undo.push((at, var, self.hints[var.index()]));
            self.put_hint(var, h);
        }
        self.hint_ops = ops;
        self.hint_ops.clear();
    }

    /// Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let assigns = &self.assigns;
                let c = &mut self.clauses[w.cref as usize];
                if c.deleted {
                    continue;
                }
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                let first = c.lits[0];
                let nw = Watch { cref: w.cref, blocker: first };
                if first != w.blocker && lit_value(assigns, first) == LBool::True {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.lits.len() {
                    if lit_value(assigns, c.lits[k]) != LBool::False {
                        c.lits.swap(1, k);
                        self.watches[c.lits[1].code()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                match self.value(first) {
                    LBool::False => {
                        conflict = Some(w.cref);
                        while i < ws.len() {
                            ws[j] = ws[i];
                            j += 1;
                            i += 1;
                        }
                    }
                    LBool::Undef => self.enqueue(first, w.cref),
                    LBool::True => {}
                }
            }
            ws.truncate(j);
            let mut restored = std::mem::take(&mut self.watches[false_lit.code()]);
            ws.append(&mut restored);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
            if !self.edges_by_lit[p.code()].is_empty() {
                if let Some(c) = self.check_edges(p) {
                    self.qhead = self.trail.len();
                    return Some(c);
                }
            }
        }
        None
    }

    fn check_edges(&mut self, p: Lit) -> Option<u32> {
        for k in 0..self.edges_by_lit[p.code()].len() {
            let e = self.edges_by_lit[p.code()][k];
            if let Some(cycle) = self.find_cycle(e) {
                let mut lits: Vec<Lit> = cycle.iter().map(|&l| !l).collect();
                lits.sort();
                lits.dedup();
                // Highest levels first so the watches stay meaningful after backjumping.
                lits.sort_by_key(|l| std::cmp::Reverse(self.level[l.var().index()]));
                if lits.len() == 1 {
                    // A single literal closes the cycle on its own; keep it as a learnt unit.
                    let l = lits[0];
                    lits.push(l);
                }
                self.stats.learnt += 1;
                return Some(self.attach(lits, true));
            }
        }
        None
    }

    /// Activation literals of a cycle through edge `e`, if the active edges close one.
    fn find_cycle(&mut self, e: u32) -> Option<Vec<Lit>> {
        let (start, goal) = {
            let edge = &self.edges[e as usize];
            (edge.to, edge.from)
        };
        self.dfs_stamp = self.dfs_stamp.wrapping_add(1);
        if self.dfs_stamp == 0 {
            self.dfs_mark.iter_mut().for_each(|m| *m = 0);
            self.dfs_stamp = 1;
        }
        let stamp = self.dfs_stamp;
        let mut stack = vec![start];
        self.dfs_mark[start as usize] = stamp;
        self.dfs_parent[start as usize] = u32::MAX;
        let mut found = false;
        while let Some(u) = stack.pop() {
            if u == goal {
                found = true;
                break;
            }
            for k in 0..self.out_edges[u as usize].len() {
                let f = self.out_edges[u as usize][k];
                let edge = &self.edges[f as usize];
                if self.value(edge.lit) != LBool::True {
                    continue;
                }
                let w = edge.to as usize;
                if self.dfs_mark[w] != stamp {
                    self.dfs_mark[w] = stamp;
                    self.dfs_parent[w] = f;
                    stack.push(edge.to);
                }
            }
        }
        if !found {
            return None;
        }
        let mut lits = vec![self.edges[e as usize].lit];
        let mut node = goal;
        while node != start {
            let f = self.dfs_parent[node as usize];
            lits.push(self.edges[f as usize].lit);
            node = self.edges[f as usize].from;
        }
        Some(lits)
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        let keys = Keys { level: &self.hint_level, activity: &self.activity };
        self.order.update(v as u32, &keys);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP learning; returns the clause (asserting literal first) and
    /// the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit::new(Var(0), true)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level() as u32;
        loop {
            self.bump_clause(confl);
            let n = self.clauses[confl as usize].lits.len();
            for k in 0..n {
                let q = self.clauses[confl as usize].lits[k];
                if Some(q) == p {
                    continue;
                }
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().index()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var().index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var().index()];
        }
        learnt[0] = !p.unwrap();

        // Drop literals implied by the rest of the clause through their reasons.
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, l)| {
                if i == 0 {
                    return true;
                }
                let r = self.reason[l.var().index()];
                if r == NO_REASON {
                    return true;
                }
                !self.clauses[r as usize]
                    .lits
                    .iter()
                    .skip(1)
                    .all(|q| self.seen[q.var().index()] || self.level[q.var().index()] == 0)
            })
            .collect();
        for l in &learnt {
            self.seen[l.var().index()] = false;
        }
        let mut out: Vec<Lit> = learnt.iter().zip(&keep).filter(|(_, &k)| k).map(|(&l, _)| l).collect();

        let mut bt = 0;
        if out.len() > 1 {
            let mut best = 1;
            for i in 2..out.len() {
                if self.level[out[i].var().index()] > self.level[out[best].var().index()] {
                    best = i;
                }
            }
            out.swap(1, best);
            bt = self.level[out[1].var().index()] as usize;
        }
        (out, bt)
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.saved_phase[v] = l.is_positive();
            self.assigns[v] = LBool::Undef;
            self.reason[v] = NO_REASON;
            let keys = Keys { level: &self.hint_level, activity: &self.activity };
            self.order.insert(v as u32, &keys);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl);
        self.qhead = lim;
        while let Some(&(at, var, old)) = self.hint_undo.last() {
            if at < lim {
                break;
            }
            self.hint_undo.pop();
            self.put_hint(var, old);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        loop {
            let keys = Keys { level: &self.hint_level, activity: &self.activity };
            let v = self.order.pop(&keys)?;
            if self.assigns[v as usize] == LBool::Undef {
                let phase = self.hints[v as usize].phase.unwrap_or(self.saved_phase[v as usize]);
                return Some(Lit::new(Var(v), phase));
            }
        }
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&c| {
                let cl = &self.clauses[c as usize];
                cl.learnt && !cl.deleted && cl.lits.len() > 2 && !self.locked(c)
            })
            .collect();
        cands.sort_by(|&a, &b| {
            self.clauses[a as usize]
                .activity
                .partial_cmp(&self.clauses[b as usize].activity)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for &c in &cands[..cands.len() / 2] {
            self.clauses[c as usize].deleted = true;
            self.clauses[c as usize].lits = Vec::new();
        }
        let clauses = &self.clauses;
        for ws in self.watches.iter_mut() {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
    }

    fn locked(&self, c: u32) -> bool {
        let l = self.clauses[c as usize].lits[0];
        self.value(l) == LBool::True && self.reason[l.var().index()] == c
    }

    fn live_learnts(&self) -> usize {
        self.clauses.iter().filter(|c| c.learnt && !c.deleted).count()
    }

    /// Solves under `assumptions`; `budget` caps the conflicts of this call.
    pub fn solve(&mut self, assumptions: &[Lit], budget: Option<u64>) -> SolveOutcome {
        let before = self.stats;
        let status = self.search(assumptions, budget);
        let model = (status == Status::Sat).then(|| Model {
            values: self.assigns.iter().map(|&a| a == LBool::True).collect(),
        });
        self.cancel_until(0);
        let s = self.stats;
        SolveOutcome {
            status,
            model,
            stats: Stats {
                conflicts: s.conflicts - before.conflicts,
                decisions: s.decisions - before.decisions,
                propagations: s.propagations - before.propagations,
                restarts: s.restarts - before.restarts,
                learnt: s.learnt - before.learnt,
            },
        }
    }

    fn search(&mut self, assumptions: &[Lit], budget: Option<u64>) -> Status {
        if !self.ok || self.check_lits(assumptions).is_err() {
            return Status::Unsat;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return Status::Unsat;
        }
        let mut conflicts = 0u64;
        let mut restart_round = 0u32;
        let mut since_restart = 0u64;
        let mut restart_limit = (luby(restart_round) * RESTART_BASE) as u64;
        self.max_learnts = self.max_learnts.max(self.original as f64 / 3.0);
        loop {
            if let Some(confl) = self.propagate() {
                conflicts += 1;
                since_restart += 1;
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Status::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(first, cref);
                }
                self.stats.learnt += 1;
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
                if budget.is_some_and(|b| conflicts >= b) {
                    return Status::BudgetExhausted;
                }
                if since_restart >= restart_limit {
                    self.stats.restarts += 1;
                    restart_round += 1;
                    since_restart = 0;
                    restart_limit = (luby(restart_round) * RESTART_BASE) as u64;
                    self.cancel_until(0);
                }
                if self.live_learnts() as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                continue;
            }
            let dl = self.decision_level();
            if dl < assumptions.len() {
                let a = assumptions[dl];
                match self.value(a) {
                    LBool::True => self.trail_lim.push(self.trail.len()),
                    LBool::False => return Status::Unsat,
                    LBool::Undef => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, NO_REASON);
                    }
                }
                continue;
            }
            match self.pick_branch() {
                None => return Status::Sat,
                Some(l) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(l, NO_REASON);
                }
            }
        }
    }

    /// Learnt clauses currently kept, for external checking.
    pub fn learnt_clauses(&self) -> Vec<Vec<Lit>> {
        self.clauses
            .iter()
            .filter(|c| c.learnt && !c.deleted)
            .map(|c| {
                let mut v = c.lits.clone();
                v.dedup();
                v
            })
            .collect()
    }

    /// Level-zero facts, which include learnt units.
    pub fn fixed_literals(&self) -> Vec<Lit> {
        let end = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        self.trail[..end].to_vec()
    }

    /// DIMACS text of the clause store; AMO groups and edges as comments.
    pub fn to_dimacs(&self) -> String {
        let originals: Vec<&Clause> = self.clauses.iter().filter(|c| !c.learnt && !c.deleted).collect();
        let units = self.fixed_literals();
        let mut out = String::new();
        for g in &self.amo_groups {
            let lits: Vec<String> = g.iter().map(|l| l.to_dimacs().to_string()).collect();
            let _ = writeln!(out, "c amo {}", lits.join(" "));
        }
        for e in &self.edges {
            let _ = writeln!(out, "c edge {} {} {}", e.lit.to_dimacs(), e.from, e.to);
        }
        let _ = writeln!(out, "p cnf {} {}", self.num_vars(), originals.len() + units.len());
        for l in &units {
            let _ = writeln!(out, "{} 0", l.to_dimacs());
        }
        for c in originals {
            for l in &c.lits {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        }
        out
    }
}

#[inline]
fn lit_value(assigns: &[LBool], l: Lit) -> LBool {
    match assigns[l.var().index()] {
        LBool::Undef => LBool::Undef,
        LBool::True if l.is_positive() => LBool::True,
        LBool::False if !l.is_positive() => LBool::True,
        _ => LBool::False,
    }
}

/// Luby sequence 1,1,2,1,1,2,4,...
fn luby(i: u32) -> f64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i as u64 + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = i as u64;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    2f64.powi(seq as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luby_prefix() {
        let got: Vec<f64> = (0..15).map(luby).collect();
        assert_eq!(got, vec![1., 1., 2., 1., 1., 2., 4., 1., 1., 2., 1., 1., 2., 4., 8.]);
    }

    #[test]
    fn unit_clause() {
        let mut e = Engine::new();
        let a = e.new_var();
        e.add_clause(&[a.pos()]).unwrap();
        let out = e.solve(&[], None);
        assert_eq!(out.status, Status::Sat);
        assert!(out.model.unwrap().value(a));
    }

    #[test]
    fn empty_store_is_sat() {
        let mut e = Engine::new();
        let out = e.solve(&[], None);
        assert_eq!(out.status, Status::Sat);
        assert!(out.model.unwrap().values().is_empty());
    }

    #[test]
    fn amo_conflict() {
        let mut e = Engine::new();
        let a = e.new_var();
        let b = e.new_var();
        e.add_amo(&[a.pos(), b.pos()]).unwrap();
        e.add_clause(&[a.pos()]).unwrap();
        e.add_clause(&[b.pos()]).unwrap();
        assert_eq!(e.solve(&[], None).status, Status::Unsat);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let mut e = Engine::new();
        let x = e.new_var();
        let y = e.new_var();
        e.add_edge(x.pos(), 0, 1).unwrap();
        e.add_edge(y.pos(), 1, 0).unwrap();
        assert_eq!(e.solve(&[], None).status, Status::Sat);
        e.add_clause(&[x.pos()]).unwrap();
        e.add_clause(&[y.pos()]).unwrap();
        assert_eq!(e.solve(&[], None).status, Status::Unsat);
    }

    #[test]
    fn assumptions_do_not_stick() {
        let mut e = Engine::new();
        let p = e.new_var();
        let q = e.new_var();
        e.add_clause(&[q.neg(), p.pos()]).unwrap();
        e.add_clause(&[p.neg()]).unwrap();
        assert_eq!(e.solve(&[q.pos()], None).status, Status::Unsat);
        assert_eq!(e.solve(&[q.neg()], None).status, Status::Sat);
        assert_eq!(e.solve(&[], None).status, Status::Sat);
    }

    #[test]
    fn unregistered_variable() {
        let mut e = Engine::new();
        assert_eq!(e.add_clause(&[Var(3).pos()]), Err(EngineError::UnregisteredVariable(3)));
    }

    #[test]
    fn hint_drives_first_decision() {
        let mut e = Engine::new();
        let _a = e.new_var();
        let b = e.new_var();
        e.set_hint(b, 7, Some(true)).unwrap();
        let decided = std::rc::Rc::new(std::cell::RefCell::new(Vec::new()));
        let log = decided.clone();
        e.on_assign(&[_a, b], move |l, _| log.borrow_mut().push(l)).unwrap();
        e.solve(&[], None);
        assert_eq!(decided.borrow()[0], b.pos());
    }

    #[test]
    fn unset_phase_falls_back_to_default() {
        let mut e = Engine::new();
        let a = e.new_var();
        let b = e.new_var();
        e.set_hint(b, 7, None).unwrap();
        let decided = std::rc::Rc::new(std::cell::RefCell::new(Vec::new()));
        let log = decided.clone();
        e.on_assign(&[a, b], move |l, _| log.borrow_mut().push(l)).unwrap();
        e.solve(&[], None);
        assert_eq!(decided.borrow()[0], b.neg());
    }

    #[test]
    fn callback_hints_are_undone_on_backtrack() {
        let mut e = Engine::new();
        let a = e.new_var();
        let b = e.new_var();
        e.on_assign(&[a], move |l, sink| sink.set_hint(b, 5, Some(l.is_positive()))).unwrap();
        e.set_hint(a, 10, Some(true)).unwrap();
        let out = e.solve(&[], None);
        assert_eq!(out.status, Status::Sat);
        let m = out.model.unwrap();
        assert!(m.value(a) && m.value(b));
        // The solve returns at level zero, so the decision on `a` was undone.
        assert_eq!(e.hint(b), Hint::default());
    }
}
