//! PDDL domain and problem files: parsing, normalization, pretty-printing,
//! fragment checks and lowering to action schemas.

mod ast;
mod beautify;
mod lower;
mod normalize;
mod parse;
mod sexpr;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use ast::{ActionSchema, Atom, Domain, Effect, Formula, InitItem, PddlAst, Predicate, Problem, Term, TypedName};
pub use beautify::{beautify, beautify_domain, beautify_problem};
pub use lower::{lower_all, lower_to_schemas, Finding, ResidualConstruct, SUPPORTED_REQUIREMENTS};
pub use normalize::{normalize, normalize_formula};
pub use parse::{parse_domain, parse_pddl, parse_problem};
pub use sexpr::{SExpr, Span};

/// Which of the two input files a position refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Part {
    #[default]
    Domain,
    Problem,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::Domain => "domain",
            Part::Problem => "problem",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{part}:{span}: {message}")]
pub struct ParseError {
    pub part: Part,
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(span: Span, message: impl Into<String>) -> Self {
        Self { part: Part::Domain, span, message: message.into() }
    }

    pub(crate) fn in_part(mut self, part: Part) -> Self {
        self.part = part;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub part: Part,
    pub span: Span,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    /// `file:line:col: severity: message`, with `file` naming the part;
    /// the position is left out when there is none.
    pub fn render(&self, domain_file: &str, problem_file: &str) -> String {
        let file = match self.part {
            Part::Domain => domain_file,
            Part::Problem => problem_file,
        };
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if self.span.line == 0 {
            format!("{file}: {sev}: {}", self.message)
        } else {
            format!("{file}:{}:{}: {sev}: {}", self.span.line, self.span.col, self.message)
        }
    }
}

/// Parse errors, or one warning per distinct unsupported construct;
/// empty when the pair is inside the supported fragment.
pub fn check_syntax(domain_text: &str, problem_text: &str) -> Vec<Diagnostic> {
    let ast = match parse_pddl(domain_text, problem_text) {
        Ok(a) => a,
        Err(e) => return vec![Diagnostic { part: e.part, span: e.span, severity: Severity::Error, message: e.message }],
    };
    let (_, findings) = lower_all(&ast);
    // One warning per message, placed at the first use that has a position.
    let mut out: Vec<Diagnostic> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for f in findings {
        let d = Diagnostic { part: f.part, span: f.span, severity: Severity::Warning, message: f.message() };
        match seen.get(&d.message) {
            Some(&i) if out[i].span.line == 0 && d.span.line > 0 => out[i] = d,
            Some(_) => {}
            None => {
                seen.insert(d.message.clone(), out.len());
                out.push(d);
            }
        }
    }
    out
}
