//! Reconstruction of the integration network from raw facts: rule
//! evaluation followed by equivalence partitioning, call-graph merge,
//! grouping and assembly.

mod model;
mod partition;
pub mod rules;
mod steps;

use thiserror::Error;

use crate::ast::Program;
use crate::engine::{self, EngineError, FactStore};

pub use model::*;
pub use partition::{EntityKind, Partition, UnionFind};
pub use rules::{listings, RuleSet, RuleSetError};
pub use steps::{
    build_network, declared_flows, group_top_level, step1_equivalences, step2_endpoints,
    step3_flows_outgoing, step4_flows_incoming, step5_merge, step6_iflows, strict_compatibility,
    Compatibility, OutgoingFlows, Partitions, StepOutputs,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Rules(#[from] RuleSetError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Rules plus the configuration-matching predicate.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub rules: RuleSet,
    pub compatible: Compatibility,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline {
            rules: RuleSet::bundled(),
            compatible: strict_compatibility,
        }
    }
}

impl Pipeline {
    pub fn with_rules(rules: RuleSet) -> Self {
        Pipeline {
            rules,
            ..Self::default()
        }
    }

    /// Evaluates the rules over `store` and assembles the network.
    pub fn run(&self, store: &FactStore) -> Result<NetworkGraph, PipelineError> {
        let program = self.rules.program()?;
        let evaluated = engine::evaluate(&program, store)?;
        Ok(self.assemble(&evaluated, &program))
    }

    /// Post-processing over a store already evaluated with `program`.
    pub fn assemble(&self, store: &FactStore, program: &Program) -> NetworkGraph {
        let parts = step1_equivalences(store);
        let (endpoints, mut report) = step2_endpoints(store, &parts);
        let ((out, (inc, declared)), iflows) = rayon::join(
            || {
                rayon::join(
                    || step3_flows_outgoing(store, &parts, &endpoints),
                    || {
                        rayon::join(
                            || step4_flows_incoming(store, &parts, &endpoints),
                            || declared_flows(store, &parts),
                        )
                    },
                )
            },
            || step6_iflows(store, &parts, program),
        );
        report.extend(out.report);
        report.extend(inc.1);
        report.extend(declared.1);
        let candidates = out.edges.into_iter().chain(inc.0).chain(declared.0);
        let (flows, unlinked) = step5_merge(&endpoints, candidates, self.compatible);
        build_network(
            store,
            &parts,
            StepOutputs {
                flows,
                unlinked,
                host_flows: out.host_flows,
                iflows,
                report,
            },
        )
    }
}

/// Runs the bundled pipeline.
pub fn run_pipeline(store: &FactStore) -> NetworkGraph {
    Pipeline::default()
        .run(store)
        .expect("bundled rules are valid and stratifiable")
}
