//! Horizon-indexed propositional encodings of a planning task.
//!
//! Step 0 fixes the initial state; every further step adds a layer of
//! `holds`/`occurs` variables plus mode-specific interference constraints.
//! `query(t)` guards the goal at step `t`, so one store serves every horizon.

use std::fmt;

use stepwise_core::{ActionId, FluentId, Semantics, StepPlan, Task, ValueId};
use stepwise_engine::{Engine, EngineError, Lit, Model, Var};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Seq,
    Forall,
    ExistsAcyc,
    GcExists,
    GcRelaxed,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Seq, Mode::Forall, Mode::ExistsAcyc, Mode::GcExists, Mode::GcRelaxed];

    pub fn semantics(self) -> Semantics {
        match self {
            Mode::Seq => Semantics::Sequential,
            Mode::Forall => Semantics::Forall,
            Mode::ExistsAcyc | Mode::GcExists => Semantics::Exists,
            Mode::GcRelaxed => Semantics::Relaxed,
        }
    }

    fn has_preconditions(self) -> bool {
        self != Mode::GcRelaxed
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Seq => "seq",
            Mode::Forall => "forall",
            Mode::ExistsAcyc => "exists-acyc",
            Mode::GcExists => "gc-exists",
            Mode::GcRelaxed => "gc-relaxed",
        })
    }
}

/// What an engine variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarAtom {
    Holds { fluent: FluentId, value: ValueId, step: usize },
    Occurs { action: ActionId, step: usize },
    Single { fluent: FluentId, step: usize },
    Query { step: usize },
    /// Auxiliary variable of a counter-based at-most-one.
    Aux,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("step {got} requested, next step is {expected}")]
    OutOfOrder { expected: usize, got: usize },
    #[error("query step {step} is beyond the encoded horizon {max}")]
    QueryOutOfRange { step: usize, max: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Constraint counts emitted for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepRecord {
    pub clauses: usize,
    pub amos: usize,
    pub edges: usize,
}

pub struct HorizonEncoding {
    mode: Mode,
    holds: Vec<Vec<Vec<Var>>>,
    occurs: Vec<Vec<Var>>,
    single: Vec<Vec<Option<Var>>>,
    query: Vec<Var>,
    atoms: Vec<VarAtom>,
    records: Vec<StepRecord>,
    forall_block: bool,
    log: Option<Vec<Vec<Vec<Lit>>>>,
}

/// Pairs `(a, b)` where `a` writes a fluent of `b`'s precondition to another value.
fn invalidating_pairs(task: &Task) -> Vec<(ActionId, ActionId)> {
    let mut out = Vec::new();
    for a in task.action_ids() {
        let post = &task.actions()[a.index()].post;
        for b in task.action_ids() {
            if a != b
                && task.actions()[b.index()]
                    .pre
                    .iter()
                    .any(|(x, v)| post.get(x).is_some_and(|w| w != v))
            {
                out.push((a, b));
            }
        }
    }
    out
}

impl HorizonEncoding {
    /// Fresh encoding with step 0 emitted.
    pub fn new(task: &Task, engine: &mut Engine, mode: Mode) -> Result<Self, EncodeError> {
        Self::build(task, engine, mode, false)
    }

    /// As [`HorizonEncoding::new`], additionally keeping every emitted clause for inspection.
    pub fn with_log(task: &Task, engine: &mut Engine, mode: Mode) -> Result<Self, EncodeError> {
        Self::build(task, engine, mode, true)
    }

    fn build(task: &Task, engine: &mut Engine, mode: Mode, log: bool) -> Result<Self, EncodeError> {
        let mut enc = Self {
            mode,
            holds: Vec::new(),
            occurs: Vec::new(),
            single: Vec::new(),
            query: Vec::new(),
            atoms: Vec::new(),
            records: Vec::new(),
            forall_block: false,
            log: log.then(Vec::new),
        };
        enc.encode_base(task, engine)?;
        Ok(enc)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn max_step(&self) -> usize {
        self.query.len() - 1
    }

    pub fn holds(&self, fluent: FluentId, value: ValueId, step: usize) -> Var {
        self.holds[step][fluent.index()][value.index()]
    }

    pub fn occurs(&self, action: ActionId, step: usize) -> Var {
        self.occurs[step][action.index()]
    }

    pub fn single(&self, fluent: FluentId, step: usize) -> Option<Var> {
        self.single.get(step)?.get(fluent.index()).copied().flatten()
    }

    pub fn query(&self, step: usize) -> Var {
        self.query[step]
    }

    pub fn atom(&self, var: Var) -> VarAtom {
        self.atoms.get(var.index()).copied().unwrap_or(VarAtom::Aux)
    }

    pub fn record(&self, step: usize) -> StepRecord {
        self.records[step]
    }

    /// Clauses of one step, when logging is on.
    pub fn logged(&self, step: usize) -> Option<&[Vec<Lit>]> {
        self.log.as_ref().and_then(|l| l.get(step)).map(Vec::as_slice)
    }

    pub fn forall_block_active(&self) -> bool {
        self.forall_block
    }

    fn var(&mut self, engine: &mut Engine, atom: VarAtom) -> Var {
        let v = engine.new_var();
        self.sync_atoms(engine);
        self.atoms[v.index()] = atom;
        v
    }

    fn sync_atoms(&mut self, engine: &Engine) {
        self.atoms.resize(engine.num_vars(), VarAtom::Aux);
    }

    fn clause(&mut self, engine: &mut Engine, step: usize, lits: &[Lit]) -> Result<(), EncodeError> {
        engine.add_clause(lits)?;
        self.records[step].clauses += 1;
        if let Some(log) = &mut self.log {
            log[step].push(lits.to_vec());
        }
        Ok(())
    }

    fn amo(&mut self, engine: &mut Engine, step: usize, lits: &[Lit]) -> Result<(), EncodeError> {
        if lits.len() < 2 {
            return Ok(());
        }
        engine.add_amo(lits)?;
        self.sync_atoms(engine);
        self.records[step].amos += 1;
        Ok(())
    }

    fn open_step(&mut self) {
        self.records.push(StepRecord::default());
        if let Some(log) = &mut self.log {
            log.push(Vec::new());
        }
    }

    fn encode_base(&mut self, task: &Task, engine: &mut Engine) -> Result<(), EncodeError> {
        self.open_step();
        let layer = self.holds_layer(task, engine, 0);
        for f in task.fluent_ids() {
            let init = task.init().get(f);
            for (v, &var) in layer[f.index()].iter().enumerate() {
                let lit = if v == init.index() { var.pos() } else { var.neg() };
                self.clause(engine, 0, &[lit])?;
            }
        }
        self.holds.push(layer);
        self.occurs.push(Vec::new());
        self.single.push(Vec::new());
        self.finish_step(task, engine, 0)
    }

    fn holds_layer(&mut self, task: &Task, engine: &mut Engine, step: usize) -> Vec<Vec<Var>> {
        task.fluent_ids()
            .map(|f| {
                (0..task.fluent(f).values.len() as u32)
                    .map(|v| self.var(engine, VarAtom::Holds { fluent: f, value: ValueId(v), step }))
                    .collect()
            })
            .collect()
    }

    /// Query variable, guarded goal clauses and mutex groups.
    fn finish_step(&mut self, task: &Task, engine: &mut Engine, t: usize) -> Result<(), EncodeError> {
        let q = self.var(engine, VarAtom::Query { step: t });
        self.query.push(q);
        for (f, v) in task.goal().iter() {
            let h = self.holds(f, v, t);
            self.clause(engine, t, &[q.neg(), h.pos()])?;
        }
        for g in task.mutex_groups() {
            let lits: Vec<Lit> = g.iter().map(|&(f, v)| self.holds(f, v, t).pos()).collect();
            self.amo(engine, t, &lits)?;
        }
        Ok(())
    }

    /// Emits step `t`, which must be exactly one past the current maximum.
    pub fn encode_step(&mut self, task: &Task, engine: &mut Engine, t: usize) -> Result<(), EncodeError> {
        let expected = self.max_step() + 1;
        if t != expected {
            return Err(EncodeError::OutOfOrder { expected, got: t });
        }
        self.open_step();
        let layer = self.holds_layer(task, engine, t);
        self.holds.push(layer);
        let occ: Vec<Var> = task
            .action_ids()
            .map(|a| self.var(engine, VarAtom::Occurs { action: a, step: t }))
            .collect();
        self.occurs.push(occ);
        self.single.push(vec![None; task.fluents().len()]);

        for f in task.fluent_ids() {
            let lits: Vec<Lit> = self.holds[t][f.index()].iter().map(|v| v.pos()).collect();
            self.clause(engine, t, &lits)?;
            self.amo(engine, t, &lits)?;
        }
        for a in task.action_ids() {
            let o = self.occurs(a, t);
            for (f, v) in task.actions()[a.index()].post.iter() {
                let h = self.holds(f, v, t);
                self.clause(engine, t, &[o.neg(), h.pos()])?;
            }
        }
        // A value may only appear if it held before or some action posts it.
        for f in task.fluent_ids() {
            for v in 0..task.fluent(f).values.len() as u32 {
                let v = ValueId(v);
                let mut lits = vec![self.holds(f, v, t).neg(), self.holds(f, v, t - 1).pos()];
                for a in task.action_ids() {
                    if task.actions()[a.index()].post.get(f) == Some(v) {
                        lits.push(self.occurs(a, t).pos());
                    }
                }
                self.clause(engine, t, &lits)?;
            }
        }
        if self.mode.has_preconditions() {
            for a in task.action_ids() {
                let o = self.occurs(a, t);
                for (f, v) in task.actions()[a.index()].pre.iter() {
                    let h = self.holds(f, v, t - 1);
                    self.clause(engine, t, &[o.neg(), h.pos()])?;
                }
            }
        }
        match self.mode {
            Mode::Seq => {
                let lits: Vec<Lit> = self.occurs[t].iter().map(|v| v.pos()).collect();
                self.amo(engine, t, &lits)?;
            }
            Mode::Forall => self.forall_interference(task, engine, t)?,
            Mode::ExistsAcyc => {
                let base = ((t - 1) * task.actions().len()) as u32;
                for (a, b) in invalidating_pairs(task) {
                    let o = self.occurs(a, t);
                    engine.add_edge(o.pos(), base + a.0, base + b.0)?;
                    self.records[t].edges += 1;
                }
            }
            Mode::GcExists => {
                if self.forall_block {
                    self.forall_interference(task, engine, t)?;
                }
            }
            Mode::GcRelaxed => {}
        }
        self.finish_step(task, engine, t)
    }

    /// No member of a step may change a fluent another member requires.
    fn forall_interference(&mut self, task: &Task, engine: &mut Engine, t: usize) -> Result<(), EncodeError> {
        let actions = task.actions();
        for f in task.fluent_ids() {
            let writers: Vec<ActionId> = task.action_ids().filter(|a| actions[a.index()].post.contains(f)).collect();
            if writers.is_empty() {
                continue;
            }
            // Readers of `f` that leave it alone clash with writers of another value.
            for a in task.action_ids() {
                let act = &actions[a.index()];
                let Some(need) = act.pre.get(f) else { continue };
                if act.post.contains(f) {
                    continue;
                }
                for &b in &writers {
                    if b != a && actions[b.index()].post.get(f) != Some(need) {
                        let (oa, ob) = (self.occurs(a, t), self.occurs(b, t));
                        self.clause(engine, t, &[oa.neg(), ob.neg()])?;
                    }
                }
            }
            // An action breaking its own requirement on `f` must be its only writer.
            let selfish: Vec<ActionId> = writers
                .iter()
                .copied()
                .filter(|a| actions[a.index()].pre.get(f).is_some_and(|v| actions[a.index()].post.get(f) != Some(v)))
                .collect();
            if selfish.is_empty() {
                continue;
            }
            let s = self.var(engine, VarAtom::Single { fluent: f, step: t });
            self.single[t][f.index()] = Some(s);
            for &a in &selfish {
                let oa = self.occurs(a, t);
                self.clause(engine, t, &[oa.neg(), s.pos()])?;
            }
            let pairs = selfish.len() * (writers.len() - 1);
            let n = writers.len();
            let guarded = if n <= 8 { n * (n - 1) / 2 } else { 3 * n - 4 };
            if pairs <= guarded {
                for &a in &selfish {
                    for &b in &writers {
                        if b != a && !(selfish.contains(&b) && b < a) {
                            let (oa, ob) = (self.occurs(a, t), self.occurs(b, t));
                            self.clause(engine, t, &[oa.neg(), ob.neg()])?;
                        }
                    }
                }
            } else {
                let lits: Vec<Lit> = writers.iter().map(|&w| self.occurs(w, t).pos()).collect();
                self.guarded_amo(engine, t, s.neg(), &lits)?;
            }
        }
        Ok(())
    }

    /// `guard ∨ at-most-one(lits)`.
    fn guarded_amo(&mut self, engine: &mut Engine, t: usize, guard: Lit, lits: &[Lit]) -> Result<(), EncodeError> {
        let n = lits.len();
        if n <= 8 {
            for i in 0..n {
                for j in i + 1..n {
                    self.clause(engine, t, &[guard, !lits[i], !lits[j]])?;
                }
            }
            return Ok(());
        }
        let s: Vec<Var> = (0..n - 1).map(|_| self.var(engine, VarAtom::Aux)).collect();
        self.clause(engine, t, &[!lits[0], s[0].pos()])?;
        for i in 1..n - 1 {
            self.clause(engine, t, &[!lits[i], s[i].pos()])?;
            self.clause(engine, t, &[s[i - 1].neg(), s[i].pos()])?;
            self.clause(engine, t, &[guard, !lits[i], s[i - 1].neg()])?;
        }
        self.clause(engine, t, &[guard, !lits[n - 1], s[n - 2].neg()])?;
        Ok(())
    }

    pub fn extend_to(&mut self, task: &Task, engine: &mut Engine, n: usize) -> Result<(), EncodeError> {
        while self.max_step() < n {
            let t = self.max_step() + 1;
            self.encode_step(task, engine, t)?;
        }
        Ok(())
    }

    /// Adds forall-step interference to every existing step and all future ones.
    pub fn add_forall_block(&mut self, task: &Task, engine: &mut Engine) -> Result<(), EncodeError> {
        if self.forall_block || self.mode == Mode::Forall {
            return Ok(());
        }
        self.forall_block = true;
        for t in 1..=self.max_step() {
            self.forall_interference(task, engine, t)?;
        }
        Ok(())
    }

    /// `query(m)` on, every other encoded query off.
    pub fn query_assumptions(&self, m: usize) -> Result<Vec<Lit>, EncodeError> {
        query_assumptions(m, self.max_step()).map(|steps| {
            steps
                .into_iter()
                .map(|(i, on)| if on { self.query[i].pos() } else { self.query[i].neg() })
                .collect()
        })
    }

    /// Steps `1..=m` of a model as a plan tagged with this mode's semantics.
    pub fn extract_plan(&self, model: &Model, m: usize) -> StepPlan {
        let steps = (1..=m)
            .map(|t| {
                self.occurs[t]
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| model.value(v))
                    .map(|(a, _)| ActionId(a as u32))
                    .collect()
            })
            .collect();
        StepPlan::new(steps, self.mode.semantics()).expect("sequential steps carry at most one action")
    }

    /// Literals pinning the occurrences of steps `1..=plan.len()` to exactly `plan`.
    pub fn plan_assumptions(&self, plan: &StepPlan) -> Vec<Lit> {
        let mut lits = Vec::new();
        for (i, step) in plan.steps().iter().enumerate() {
            for (a, &v) in self.occurs[i + 1].iter().enumerate() {
                let on = step.contains(&ActionId(a as u32));
                lits.push(if on { v.pos() } else { v.neg() });
            }
        }
        lits
    }

    pub fn describe(&self, task: &Task, lit: Lit) -> String {
        let sign = if lit.is_positive() { "" } else { "-" };
        let body = match self.atom(lit.var()) {
            VarAtom::Holds { fluent, value, step } => {
                format!("holds({},{},{})", task.fluent(fluent).name, task.value_name(fluent, value), step)
            }
            VarAtom::Occurs { action, step } => format!("occurs({},{})", task.actions()[action.index()].name, step),
            VarAtom::Single { fluent, step } => format!("single({},{})", task.fluent(fluent).name, step),
            VarAtom::Query { step } => format!("query({step})"),
            VarAtom::Aux => format!("aux{}", lit.var().0),
        };
        format!("{sign}{body}")
    }

    /// Engine DIMACS text preceded by one comment per named variable.
    pub fn dump(&self, task: &Task, engine: &Engine) -> String {
        let mut out = format!("c mode {}\n", self.mode);
        for (i, atom) in self.atoms.iter().enumerate() {
            if *atom != VarAtom::Aux {
                out.push_str(&format!("c var {} {}\n", i + 1, self.describe(task, Var(i as u32).pos())));
            }
        }
        out.push_str(&engine.to_dimacs());
        out
    }
}

/// `(step, polarity)` pairs: `m` on, every other step up to `max_step` off.
pub fn query_assumptions(m: usize, max_step: usize) -> Result<Vec<(usize, bool)>, EncodeError> {
    if m > max_step {
        return Err(EncodeError::QueryOutOfRange { step: m, max: max_step });
    }
    let mut out = vec![(m, true)];
    out.extend((0..=max_step).filter(|&i| i != m).map(|i| (i, false)));
    Ok(out)
}
