//! Ground multivalued planning tasks, the fact interchange format, and
//! serializability checks for parallel step plans.

pub mod error;
pub mod facts;
pub mod fixtures;
pub mod model;
pub mod plan;
pub mod serial;

#[cfg(any(test, feature = "testing"))]
pub mod testing;

pub use error::ModelError;
pub use facts::{read_facts, write_facts, FactsError};
pub use model::{
    Action, ActionId, Fluent, FluentId, PartialState, Semantics, State, Task, TaskBuilder, ValueId,
};
pub use plan::StepPlan;
pub use serial::{
    check_exists, check_exists_fixpoint, exists_non_ready, relaxed_non_ready, check_forall, check_relaxed, invalidation_graph,
    oracle_serializable, validate_plan, InvalidReason, InvalidationGraph, OracleError,
    ValidationReport,
};
