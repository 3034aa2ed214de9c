//! Step plans and their two text renderings.

use std::fmt::Write as _;

use thiserror::Error;

use crate::error::ModelError;
use crate::facts::quote_symbol;
use crate::model::{ActionId, Semantics, Task};

/// A sequence of action sets; empty sets are idle steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepPlan {
    steps: Vec<Vec<ActionId>>,
    semantics: Semantics,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown action `{name}`")]
    UnknownAction { line: usize, name: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl StepPlan {
    /// Each step is sorted by ordinal and deduplicated.
    pub fn new(steps: Vec<Vec<ActionId>>, semantics: Semantics) -> Result<Self, ModelError> {
        let steps: Vec<Vec<ActionId>> = steps
            .into_iter()
            .map(|mut s| {
                s.sort();
                s.dedup();
                s
            })
            .collect();
        if semantics == Semantics::Sequential {
            if let Some((i, s)) = steps.iter().enumerate().find(|(_, s)| s.len() > 1) {
                return Err(ModelError::SequentialStepTooLarge { step: i + 1, size: s.len() });
            }
        }
        Ok(Self { steps, semantics })
    }

    pub fn sequential(actions: &[ActionId]) -> Self {
        Self {
            steps: actions.iter().map(|&a| vec![a]).collect(),
            semantics: Semantics::Sequential,
        }
    }

    pub fn steps(&self) -> &[Vec<ActionId>] {
        &self.steps
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn action_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    /// Same steps under another tag; fails only when retagging as sequential.
    pub fn with_semantics(&self, semantics: Semantics) -> Result<Self, ModelError> {
        Self::new(self.steps.clone(), semantics)
    }

    /// `step <t>: a b` lines, one per step, including idle ones.
    pub fn to_step_text(&self, task: &Task) -> String {
        let mut out = String::new();
        for (i, step) in self.steps.iter().enumerate() {
            let _ = write!(out, "step {}:", i + 1);
            for &a in step {
                let _ = write!(out, " {}", task.actions()[a.index()].name);
            }
            out.push('\n');
        }
        out
    }

    /// `occurs(a,t).` lines in step order.
    pub fn to_occurs_text(&self, task: &Task) -> String {
        let mut out = String::new();
        for (i, step) in self.steps.iter().enumerate() {
            for &a in step {
                let _ = writeln!(out, "occurs({},{}).", quote_symbol(&task.actions()[a.index()].name), i + 1);
            }
        }
        out
    }

    /// Accepts either rendering; `%` and `#` start comments.
    pub fn parse(task: &Task, text: &str, semantics: Semantics) -> Result<Self, PlanParseError> {
        let mut steps: Vec<Vec<ActionId>> = Vec::new();
        let lookup = |line: usize, name: &str| {
            task.action_by_name(name).ok_or_else(|| PlanParseError::UnknownAction {
                line,
                name: name.to_string(),
            })
        };
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split(['%', '#']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: &str| PlanParseError::Syntax { line: line_no, msg: msg.to_string() };
            if let Some(rest) = line.strip_prefix("step") {
                let (num, acts) = rest.split_once(':').ok_or_else(|| syntax("expected `step <t>:`"))?;
                let t: usize = num.trim().parse().map_err(|_| syntax("bad step number"))?;
                if t == 0 {
                    return Err(syntax("steps are numbered from 1"));
                }
                grow(&mut steps, t);
                for name in acts.split_whitespace() {
                    steps[t - 1].push(lookup(line_no, name)?);
                }
            } else {
                for fact in line.split_inclusive(").").map(str::trim).filter(|f| !f.is_empty()) {
                    let body = fact
                        .strip_prefix("occurs(")
                        .and_then(|f| f.strip_suffix(")."))
                        .ok_or_else(|| syntax("expected `occurs(a,t).`"))?;
                    let (name, t) = body.rsplit_once(',').ok_or_else(|| syntax("expected `occurs(a,t).`"))?;
                    let t: usize = t.trim().parse().map_err(|_| syntax("bad step number"))?;
                    if t == 0 {
                        return Err(syntax("steps are numbered from 1"));
                    }
                    let name = unquote(name.trim());
                    grow(&mut steps, t);
                    steps[t - 1].push(lookup(line_no, &name)?);
                }
            }
        }
        Ok(Self::new(steps, semantics)?)
    }
}

fn grow(steps: &mut Vec<Vec<ActionId>>, t: usize) {
    if steps.len() < t {
        steps.resize(t, Vec::new());
    }
}

fn unquote(s: &str) -> String {
    match s.strip_prefix('"').and_then(|s| s.strip_suffix('"')) {
        Some(inner) => inner.replace("\\\"", "\"").replace("\\\\", "\\"),
        None => s.to_string(),
    }
}
