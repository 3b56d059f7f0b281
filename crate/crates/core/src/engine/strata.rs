//! Predicate dependency graph and stratification.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::ast::{check_safety, Polarity, Program, Rule};
use crate::engine::EngineError;

/// Predicates as nodes; an edge `q -> p` exists when `q` occurs in the body
/// of a rule defining `p`. The edge is negative if any such occurrence is
/// negated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<(String, String), Polarity>,
}

impl DependencyGraph {
    pub fn edge(&self, from: &str, to: &str) -> Option<Polarity> {
        self.edges.get(&(from.to_string(), to.to_string())).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn build_dependency_graph(program: &Program) -> DependencyGraph {
    let mut g = DependencyGraph::default();
    for f in &program.facts {
        g.nodes.insert(f.predicate.clone());
    }
    for rule in &program.rules {
        let head = &rule.head.predicate;
        g.nodes.insert(head.clone());
        for lit in &rule.body {
            g.nodes.insert(lit.predicate.clone());
            let e = g
                .edges
                .entry((lit.predicate.clone(), head.clone()))
                .or_insert(Polarity::Positive);
            if lit.is_negative() {
                *e = Polarity::Negative;
            }
        }
    }
    g
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StratifiedProgram {
    /// Rules grouped by the stratum of their head predicate. A stratum may
    /// hold no rules (e.g. stratum 0 when it only contains base relations).
    pub strata: Vec<Vec<Rule>>,
    pub predicate_stratum: BTreeMap<String, usize>,
}

impl StratifiedProgram {
    pub fn stratum_count(&self) -> usize {
        self.strata.len()
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.strata.iter().flatten()
    }

    pub fn stratum_of(&self, predicate: &str) -> Option<usize> {
        self.predicate_stratum.get(predicate).copied()
    }
}

/// Partitions the rules into the minimal number of strata such that every
/// negated predicate is complete before it is used.
pub fn stratify(program: &Program) -> Result<StratifiedProgram, EngineError> {
    let violations = check_safety(program);
    if !violations.is_empty() {
        return Err(EngineError::Unsafe(violations));
    }
    let dg = build_dependency_graph(program);
    if dg.is_empty() {
        return Ok(StratifiedProgram::default());
    }

    let mut graph: DiGraph<&str, Polarity> = DiGraph::new();
    let mut node_of: HashMap<&str, NodeIndex> = HashMap::new();
    for n in &dg.nodes {
        node_of.insert(n.as_str(), graph.add_node(n.as_str()));
    }
    for ((from, to), pol) in &dg.edges {
        graph.add_edge(node_of[from.as_str()], node_of[to.as_str()], *pol);
    }

    // tarjan_scc yields components in reverse topological order.
    let sccs = tarjan_scc(&graph);
    let mut comp = vec![0usize; graph.node_count()];
    for (c, members) in sccs.iter().enumerate() {
        for n in members {
            comp[n.index()] = c;
        }
    }

    for ((from, to), pol) in &dg.edges {
        let (f, t) = (node_of[from.as_str()], node_of[to.as_str()]);
        if *pol == Polarity::Negative && comp[f.index()] == comp[t.index()] {
            return Err(EngineError::Unstratifiable {
                cycle: negative_cycle(&graph, &comp, f, t),
            });
        }
    }

    let mut comp_stratum = vec![0usize; sccs.len()];
    for c in (0..sccs.len()).rev() {
        let mut level = 0;
        for &n in &sccs[c] {
            for e in graph.edges_directed(n, petgraph::Direction::Incoming) {
                use petgraph::visit::EdgeRef;
                let src = comp[e.source().index()];
                if src == c {
                    continue;
                }
                let bump = usize::from(*e.weight() == Polarity::Negative);
                level = level.max(comp_stratum[src] + bump);
            }
        }
        comp_stratum[c] = level;
    }

    let mut predicate_stratum = BTreeMap::new();
    for (name, idx) in &node_of {
        predicate_stratum.insert(name.to_string(), comp_stratum[comp[idx.index()]]);
    }
    let count = predicate_stratum.values().max().map_or(0, |m| m + 1);
    let mut strata = vec![Vec::new(); count];
    for rule in &program.rules {
        strata[predicate_stratum[&rule.head.predicate]].push(rule.clone());
    }
    Ok(StratifiedProgram {
        strata,
        predicate_stratum,
    })
}

/// Cycle `from -> to -> ... -> from` inside one component, given that the
/// negative edge `from -> to` closes it.
fn negative_cycle(
    graph: &DiGraph<&str, Polarity>,
    comp: &[usize],
    from: NodeIndex,
    to: NodeIndex,
) -> Vec<String> {
    let c = comp[from.index()];
    let mut prev: HashMap<NodeIndex, NodeIndex> = HashMap::new();
    let mut queue = VecDeque::from([to]);
    let mut seen = BTreeSet::from([to]);
    while let Some(n) = queue.pop_front() {
        if n == from {
            break;
        }
        for m in graph.neighbors(n) {
            if comp[m.index()] == c && seen.insert(m) {
                prev.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    // Walk back from `from` to `to`, then prepend `from` for the closing edge.
    let mut back = vec![from];
    let mut cur = from;
    while cur != to {
        cur = prev[&cur];
        back.push(cur);
    }
    std::iter::once(from)
        .chain(back.into_iter().rev())
        .map(|n| graph[n].to_string())
        .collect()
}
