use thiserror::Error;

/// Structural errors raised while building or querying a task.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("fluent `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("fluent `{fluent}` lists value `{value}` twice")]
    DuplicateValue { fluent: String, value: String },
    #[error("fluent `{0}` declared twice")]
    DuplicateFluent(String),
    #[error("action `{0}` declared twice")]
    DuplicateAction(String),
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("value `{value}` is not in the domain of `{fluent}`")]
    UnknownValue { fluent: String, value: String },
    #[error("conflicting bindings for fluent `{fluent}`")]
    ConflictingBinding { fluent: String },
    #[error("action `{0}` has an empty postcondition")]
    EmptyPostcondition(String),
    #[error("initial state does not bind fluent `{0}`")]
    NonTotalInit(String),
    #[error("initial state violates mutex group {0}")]
    MutexViolatedByInit(usize),
    #[error("state has {found} entries, task has {expected} fluents")]
    StateWidth { expected: usize, found: usize },
    #[error("sequential plan step {step} has {size} actions")]
    SequentialStepTooLarge { step: usize, size: usize },
}
