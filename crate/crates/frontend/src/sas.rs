//! Fast Downward's SAS output, version 3.

use stepwise_core::{FluentId, ModelError, Task, TaskBuilder, ValueId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SasError {
    #[error("line {line}: expected `{expected}`, found `{found}`")]
    Sentinel { line: usize, expected: String, found: String },
    #[error("line {line}: unsupported SAS version {version} (only 3 is accepted)")]
    Version { line: usize, version: i64 },
    #[error("line {line}: expected an integer, found `{found}`")]
    NotANumber { line: usize, found: String },
    #[error("line {line}: {what} {index} out of range (limit {limit})")]
    OutOfRange { line: usize, what: &'static str, index: i64, limit: usize },
    #[error("line {line}: unexpected end of input")]
    Eof { line: usize },
    #[error("initial state lists {got} values for {want} variables")]
    NonTotalInit { got: usize, want: usize },
    #[error("axioms are not supported")]
    AxiomsUnsupported,
    #[error("operator `{0}` has a conditional effect, which is not supported")]
    ConditionalEffectUnsupported(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasVariable {
    pub name: String,
    /// `-1` for ordinary state variables.
    pub axiom_layer: i64,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasEffect {
    pub conditions: Vec<(usize, usize)>,
    pub var: usize,
    /// `None` for the "any value" marker `-1`.
    pub pre: Option<usize>,
    pub post: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasOperator {
    pub name: String,
    pub prevail: Vec<(usize, usize)>,
    pub effects: Vec<SasEffect>,
    /// Read and kept, never used for planning.
    pub cost: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasDocument {
    pub version: i64,
    pub metric: bool,
    pub variables: Vec<SasVariable>,
    pub mutex_groups: Vec<Vec<(usize, usize)>>,
    pub init: Vec<usize>,
    pub goal: Vec<(usize, usize)>,
    pub operators: Vec<SasOperator>,
    /// Raw lines of each axiom rule.
    pub axioms: Vec<Vec<String>>,
    /// Sections this reader does not know, with their raw lines.
    pub opaque: Vec<(String, Vec<String>)>,
    pub warnings: Vec<String>,
}

impl SasDocument {
    pub fn axioms_unsupported(&self) -> bool {
        !self.axioms.is_empty() || self.variables.iter().any(|v| v.axiom_layer >= 0)
    }
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn line_no(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Result<&'a str, SasError> {
        let l = self.peek().ok_or(SasError::Eof { line: self.line_no() })?;
        self.pos += 1;
        Ok(l)
    }

    fn expect(&mut self, want: &str) -> Result<(), SasError> {
        let line = self.line_no();
        let got = self.next()?;
        if got != want {
            return Err(SasError::Sentinel { line, expected: want.into(), found: got.into() });
        }
        Ok(())
    }

    fn int(&mut self) -> Result<i64, SasError> {
        let line = self.line_no();
        let s = self.next()?;
        s.parse().map_err(|_| SasError::NotANumber { line, found: s.into() })
    }

    fn ints(&mut self, n: usize) -> Result<Vec<i64>, SasError> {
        let line = self.line_no();
        let s = self.next()?;
        let v: Vec<i64> = s
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| SasError::NotANumber { line, found: t.into() }))
            .collect::<Result<_, _>>()?;
        if v.len() != n {
            return Err(SasError::NotANumber { line, found: s.into() });
        }
        Ok(v)
    }

    fn count(&mut self) -> Result<usize, SasError> {
        let line = self.line_no();
        let n = self.int()?;
        usize::try_from(n).map_err(|_| SasError::OutOfRange { line, what: "count", index: n, limit: usize::MAX })
    }

    /// Skips an unknown `begin_x ... end_x` block if one starts here.
    fn opaque(&mut self, doc: &mut SasDocument) -> Result<bool, SasError> {
        let Some(l) = self.peek() else { return Ok(false) };
        let Some(name) = l.strip_prefix("begin_") else { return Ok(false) };
        if KNOWN.contains(&name) {
            return Ok(false);
        }
        let name = name.to_string();
        self.next()?;
        let end = format!("end_{name}");
        let mut body = Vec::new();
        loop {
            let l = self.next()?;
            if l == end {
                break;
            }
            body.push(l.to_string());
        }
        doc.warnings.push(format!("unknown section `{name}` kept as is"));
        doc.opaque.push((name, body));
        Ok(true)
    }
}

const KNOWN: [&str; 8] = ["version", "metric", "variable", "mutex_group", "state", "goal", "operator", "rule"];

struct Checker<'d> {
    vars: &'d [SasVariable],
}

impl Checker<'_> {
    fn var(&self, line: usize, v: i64) -> Result<usize, SasError> {
        if v < 0 || v as usize >= self.vars.len() {
            return Err(SasError::OutOfRange { line, what: "variable", index: v, limit: self.vars.len() });
        }
        Ok(v as usize)
    }

    fn val(&self, line: usize, var: usize, v: i64) -> Result<usize, SasError> {
        let n = self.vars[var].values.len();
        if v < 0 || v as usize >= n {
            return Err(SasError::OutOfRange { line, what: "value", index: v, limit: n });
        }
        Ok(v as usize)
    }

    fn pair(&self, lines: &mut Lines<'_>) -> Result<(usize, usize), SasError> {
        let line = lines.line_no();
        let p = lines.ints(2)?;
        let var = self.var(line, p[0])?;
        Ok((var, self.val(line, var, p[1])?))
    }
}

pub fn parse_sas(text: &str) -> Result<SasDocument, SasError> {
    let mut r = Lines { lines: text.lines().map(str::trim_end).collect(), pos: 0 };
    while r.peek().is_some_and(|l| l.trim().is_empty()) {
        r.pos += 1;
    }
    let mut doc = SasDocument {
        version: 0,
        metric: false,
        variables: Vec::new(),
        mutex_groups: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
        operators: Vec::new(),
        axioms: Vec::new(),
        opaque: Vec::new(),
        warnings: Vec::new(),
    };
    r.expect("begin_version")?;
    let line = r.line_no();
    doc.version = r.int()?;
    if doc.version != 3 {
        return Err(SasError::Version { line, version: doc.version });
    }
    r.expect("end_version")?;
    r.expect("begin_metric")?;
    doc.metric = r.int()? != 0;
    r.expect("end_metric")?;
    while r.opaque(&mut doc)? {}

    let nvars = r.count()?;
    for _ in 0..nvars {
        r.expect("begin_variable")?;
        let name = r.next()?.to_string();
        let axiom_layer = r.int()?;
        let range = r.count()?;
        let values = (0..range).map(|_| r.next().map(str::to_string)).collect::<Result<_, _>>()?;
        r.expect("end_variable")?;
        doc.variables.push(SasVariable { name, axiom_layer, values });
    }
    while r.opaque(&mut doc)? {}
    let variables = std::mem::take(&mut doc.variables);
    let ck = Checker { vars: &variables };

    let ngroups = r.count()?;
    let mut groups = Vec::with_capacity(ngroups);
    for _ in 0..ngroups {
        r.expect("begin_mutex_group")?;
        let n = r.count()?;
        groups.push((0..n).map(|_| ck.pair(&mut r)).collect::<Result<Vec<_>, _>>()?);
        r.expect("end_mutex_group")?;
    }
    while r.opaque(&mut doc)? {}

    r.expect("begin_state")?;
    let mut init = Vec::new();
    loop {
        let line = r.line_no();
        if r.peek() == Some("end_state") {
            r.next()?;
            break;
        }
        let v = r.int()?;
        if init.len() >= variables.len() {
            return Err(SasError::NonTotalInit { got: init.len() + 1, want: variables.len() });
        }
        init.push(ck.val(line, init.len(), v)?);
    }
    if init.len() != variables.len() {
        return Err(SasError::NonTotalInit { got: init.len(), want: variables.len() });
    }

    r.expect("begin_goal")?;
    let n = r.count()?;
    let goal = (0..n).map(|_| ck.pair(&mut r)).collect::<Result<Vec<_>, _>>()?;
    r.expect("end_goal")?;
    while r.opaque(&mut doc)? {}

    let nops = r.count()?;
    let mut operators = Vec::with_capacity(nops);
    for _ in 0..nops {
        r.expect("begin_operator")?;
        let name = r.next()?.trim().to_string();
        let np = r.count()?;
        let prevail = (0..np).map(|_| ck.pair(&mut r)).collect::<Result<Vec<_>, _>>()?;
        let ne = r.count()?;
        let mut effects = Vec::with_capacity(ne);
        for _ in 0..ne {
            let line = r.line_no();
            let raw = r.next()?;
            let nums: Vec<i64> = raw
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| SasError::NotANumber { line, found: t.into() }))
                .collect::<Result<_, _>>()?;
            let bad = || SasError::NotANumber { line, found: raw.into() };
            let nc = usize::try_from(*nums.first().ok_or_else(bad)?).map_err(|_| bad())?;
            if nums.len() != 1 + 2 * nc + 3 {
                return Err(bad());
            }
            let mut conditions = Vec::with_capacity(nc);
            for c in 0..nc {
                let var = ck.var(line, nums[1 + 2 * c])?;
                conditions.push((var, ck.val(line, var, nums[2 + 2 * c])?));
            }
            let rest = &nums[1 + 2 * nc..];
            let var = ck.var(line, rest[0])?;
            let pre = if rest[1] == -1 { None } else { Some(ck.val(line, var, rest[1])?) };
            let post = ck.val(line, var, rest[2])?;
            effects.push(SasEffect { conditions, var, pre, post });
        }
        let cost = r.int()?;
        r.expect("end_operator")?;
        operators.push(SasOperator { name, prevail, effects, cost });
    }
    while r.opaque(&mut doc)? {}

    let mut axioms = Vec::new();
    if r.peek().is_some() {
        let n = r.count()?;
        for _ in 0..n {
            r.expect("begin_rule")?;
            let mut body = Vec::new();
            loop {
                let l = r.next()?;
                if l == "end_rule" {
                    break;
                }
                body.push(l.to_string());
            }
            axioms.push(body);
        }
    }
    while r.opaque(&mut doc)? {}
    if let Some(l) = r.peek().filter(|l| !l.trim().is_empty()) {
        return Err(SasError::Sentinel { line: r.line_no(), expected: "end of input".into(), found: l.into() });
    }
    doc.variables = variables;
    doc.mutex_groups = groups;
    doc.init = init;
    doc.goal = goal;
    doc.operators = operators;
    doc.axioms = axioms;
    Ok(doc)
}

/// `pick-up a b` becomes `pick-up(a,b)`, the naming the PDDL grounder uses.
pub fn action_name(op: &str) -> String {
    let mut parts = op.split_whitespace();
    let head = parts.next().unwrap_or_default();
    let args: Vec<&str> = parts.collect();
    if args.is_empty() {
        head.to_string()
    } else {
        format!("{head}({})", args.join(","))
    }
}

pub fn to_task(doc: &SasDocument) -> Result<Task, SasError> {
    if doc.axioms_unsupported() {
        return Err(SasError::AxiomsUnsupported);
    }
    let mut b = TaskBuilder::new();
    for (i, v) in doc.variables.iter().enumerate() {
        let f = b.add_fluent(v.name.clone(), v.values.iter().cloned())?;
        b.set_init(f, ValueId(doc.init[i] as u32))?;
    }
    let pair = |&(v, x): &(usize, usize)| (FluentId(v as u32), ValueId(x as u32));
    for g in &doc.goal {
        let (f, v) = pair(g);
        b.add_goal(f, v)?;
    }
    for op in &doc.operators {
        if op.effects.iter().any(|e| !e.conditions.is_empty()) {
            return Err(SasError::ConditionalEffectUnsupported(op.name.clone()));
        }
        let mut pre: Vec<_> = op.prevail.iter().map(pair).collect();
        pre.extend(op.effects.iter().filter_map(|e| e.pre.map(|p| pair(&(e.var, p)))));
        let post = op.effects.iter().map(|e| pair(&(e.var, e.post))).collect();
        b.add_action(action_name(&op.name), pre, post)?;
    }
    for g in &doc.mutex_groups {
        b.add_mutex_group(g.iter().map(pair).collect())?;
    }
    Ok(b.build()?)
}
