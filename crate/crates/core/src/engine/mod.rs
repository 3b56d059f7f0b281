//! Bottom-up evaluation of stratified Datalog.

mod eval;
mod store;
mod strata;

use thiserror::Error;

use crate::ast::SafetyViolation;

pub use eval::{evaluate_naive, evaluate_seminaive};
pub use store::{FactId, FactStore, Origin, StoredFact, Substitution};
pub use strata::{build_dependency_graph, stratify, DependencyGraph, StratifiedProgram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("program is not stratifiable: cycle through negation {}", format_cycle(.cycle))]
    Unstratifiable { cycle: Vec<String> },
    #[error("unsafe rules: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Unsafe(Vec<SafetyViolation>),
    #[error("non-ground fact `{0}`")]
    NonGround(String),
    #[error("snapshots must be of discovered or user origin")]
    DerivedSnapshot,
}

fn format_cycle(cycle: &[String]) -> String {
    match cycle.split_first() {
        Some((first, rest)) if !rest.is_empty() => {
            let mut s = format!("{first} -not-> {}", rest[0]);
            for p in &rest[1..] {
                s.push_str(" -> ");
                s.push_str(p);
            }
            s
        }
        _ => cycle.join(" -> "),
    }
}

/// Stratifies `program` and evaluates it semi-naively over `store` plus the
/// program's own facts.
pub fn evaluate(program: &crate::ast::Program, store: &FactStore) -> Result<FactStore, EngineError> {
    let strat = stratify(program)?;
    let mut base = store.clone();
    if !program.facts.is_empty() {
        base.ingest_snapshot(&program.facts, Origin::Discovered)?;
    }
    Ok(evaluate_seminaive(&strat, &base))
}
