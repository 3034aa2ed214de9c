//! Incremental propositional engine used by the planner.
//!
//! Clauses and at-most-one groups are permanent; solve calls take
//! assumption literals and an optional conflict budget. Conditional edges
//! (`lit => from -> to`) must form an acyclic graph in every model.

mod heap;
mod lit;
mod solver;

pub use lit::{Lit, Var};
pub use solver::{Engine, EngineError, Hint, HintSink, Model, SolveOutcome, Stats, Status};
