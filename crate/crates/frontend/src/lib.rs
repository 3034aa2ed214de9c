//! Input front ends: PDDL (parsed, normalized, lowered and grounded) and
//! Fast Downward SAS files, both ending in a [`stepwise_core::Task`].

pub mod ground;
pub mod pddl;
pub mod sas;
pub mod schema;

use stepwise_core::Task;
use thiserror::Error;

pub use ground::{ground, static_filter, GroundError, GroundOptions, Grounded};
pub use sas::{parse_sas, to_task, SasDocument, SasError};
pub use schema::SchemaTask;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error(transparent)]
    Parse(#[from] pddl::ParseError),
    #[error(transparent)]
    Unsupported(#[from] pddl::ResidualConstruct),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Sas(#[from] SasError),
}

/// Domain and problem text to a ground task, with the warnings collected
/// on the way.
pub fn translate_pddl(domain: &str, problem: &str, opts: &GroundOptions) -> Result<Grounded, FrontendError> {
    let ast = pddl::parse_pddl(domain, problem)?;
    let (schemas, findings) = pddl::lower_to_schemas(&ast)?;
    let mut g = ground(&schemas, opts)?;
    let mut warnings: Vec<String> = findings.iter().map(|f| format!("{}: {}", f.part, f.message())).collect();
    warnings.append(&mut g.warnings);
    g.warnings = warnings;
    Ok(g)
}

pub fn translate_sas(text: &str) -> Result<(Task, Vec<String>), FrontendError> {
    let doc = parse_sas(text)?;
    let task = to_task(&doc)?;
    Ok((task, doc.warnings))
}
