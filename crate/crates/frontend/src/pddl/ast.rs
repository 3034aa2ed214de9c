use super::sexpr::{SExpr, Span};

/// A name with its declared type; `types` holds more than one entry for
/// `(either ...)` and is `["object"]` when untyped.
#[derive(Clone, Debug, PartialEq)]
pub struct TypedName {
    pub name: String,
    pub types: Vec<String>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Without the leading `?`.
    Var(String),
    Const(String),
}

impl Term {
    pub fn render(&self) -> String {
        match self {
            Term::Var(v) => format!("?{v}"),
            Term::Const(c) => c.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Atom(Atom),
    Equals(Term, Term, Span),
    Not(Box<Formula>, Span),
    And(Vec<Formula>, Span),
    Or(Vec<Formula>, Span),
    Imply(Box<Formula>, Box<Formula>, Span),
    Forall(Vec<TypedName>, Box<Formula>, Span),
    Exists(Vec<TypedName>, Box<Formula>, Span),
    /// Comparison over numeric fluents, kept verbatim.
    Numeric(SExpr),
}

impl Formula {
    pub fn span(&self) -> Span {
        match self {
            Formula::Atom(a) => a.span,
            Formula::Equals(_, _, s)
            | Formula::Not(_, s)
            | Formula::And(_, s)
            | Formula::Or(_, s)
            | Formula::Imply(_, _, s)
            | Formula::Forall(_, _, s)
            | Formula::Exists(_, _, s) => *s,
            Formula::Numeric(e) => e.span(),
        }
    }

    pub fn truth() -> Self {
        Formula::And(Vec::new(), Span::default())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Effect {
    Add(Atom),
    Del(Atom, Span),
    And(Vec<Effect>, Span),
    Forall(Vec<TypedName>, Box<Effect>, Span),
    When(Formula, Box<Effect>, Span),
    /// `increase`, `assign` and friends, kept verbatim.
    Numeric(SExpr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<TypedName>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Option<Formula>,
    pub effect: Option<Effect>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub name: String,
    /// With the leading colon.
    pub requirements: Vec<String>,
    /// Each declared type with its parent(s).
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Predicate>,
    pub actions: Vec<ActionSchema>,
    /// Sections outside the supported fragment (`:functions`, `:derived`,
    /// `:durative-action`, ...), kept verbatim.
    pub extra: Vec<SExpr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitItem {
    Atom(Atom),
    /// Numeric assignments, timed literals and the like.
    Other(SExpr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub requirements: Vec<String>,
    pub objects: Vec<TypedName>,
    pub init: Vec<InitItem>,
    pub goal: Formula,
    /// `:metric`, `:constraints` and other sections, kept verbatim.
    pub extra: Vec<SExpr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PddlAst {
    pub domain: Domain,
    pub problem: Problem,
}
