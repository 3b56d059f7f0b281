use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::inference::NetworkGraph;

use super::truth::GroundTruth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Parties,
    Systems,
    SystemAttributes,
    Groups,
    Flows,
    FlowAttributes,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Parties,
        Category::Systems,
        Category::SystemAttributes,
        Category::Groups,
        Category::Flows,
        Category::FlowAttributes,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Parties => "Found expected Parties",
            Category::Systems => "Found expected Systems",
            Category::SystemAttributes => "Correct System Attributes",
            Category::Groups => "Found Expected Top-Level Connection Groups",
            Category::Flows => "Found Expected MessageFlows",
            Category::FlowAttributes => "Correct MessageFlow Attributes",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub category: Category,
    pub expected: usize,
    /// Entities (or attribute keys) reported by the graph.
    pub found: usize,
    /// Reported items matching the truth exactly.
    pub correct: usize,
    /// Reported items with no counterpart in the truth.
    pub unexpected: usize,
    /// `correct / expected` in percent; 100 when nothing is expected.
    pub percentage: f64,
}

impl ScoreRow {
    fn new(category: Category, expected: usize, found: usize, correct: usize, unexpected: usize) -> Self {
        let percentage = if expected == 0 {
            100.0
        } else {
            100.0 * correct as f64 / expected as f64
        };
        ScoreRow {
            category,
            expected,
            found,
            correct,
            unexpected,
            percentage,
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.correct == self.expected && self.unexpected == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub rows: Vec<ScoreRow>,
}

impl ScoreReport {
    pub fn row(&self, category: Category) -> &ScoreRow {
        self.rows
            .iter()
            .find(|r| r.category == category)
            .expect("every category is scored")
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<44} {:>8} {:>8} {:>8} {:>10} {:>7}",
            "category", "expected", "found", "correct", "unexpected", "%"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<44} {:>8} {:>8} {:>8} {:>10} {:>6.0}%",
                r.category.label(),
                r.expected,
                r.found,
                r.correct,
                r.unexpected,
                r.percentage
            )?;
        }
        Ok(())
    }
}

/// Scores `graph` against `truth`. A graph system maps to a true system
/// when its member ids are exactly that system's aliases.
pub fn score(graph: &NetworkGraph, truth: &GroundTruth) -> ScoreReport {
    let alias_sets: BTreeMap<BTreeSet<&str>, &str> = truth
        .systems
        .iter()
        .map(|s| (s.aliases.iter().map(String::as_str).collect(), s.id.as_str()))
        .collect();
    // canonical graph id -> true id
    let mapped: BTreeMap<&str, &str> = graph
        .systems
        .iter()
        .filter_map(|n| {
            let members: BTreeSet<&str> = n.members.iter().map(String::as_str).collect();
            alias_sets.get(&members).map(|t| (n.id.as_str(), *t))
        })
        .collect();
    let to_true = |id: &str| mapped.get(id).copied();

    let mut rows = Vec::new();

    let true_parties: BTreeSet<&str> = truth.parties.iter().map(String::as_str).collect();
    let found_parties: BTreeSet<&str> = graph.parties.iter().map(|p| p.id.as_str()).collect();
    let hit = true_parties.intersection(&found_parties).count();
    rows.push(ScoreRow::new(
        Category::Parties,
        true_parties.len(),
        found_parties.len(),
        hit,
        found_parties.len() - hit,
    ));

    rows.push(ScoreRow::new(
        Category::Systems,
        truth.systems.len(),
        graph.systems.len(),
        mapped.len(),
        graph.systems.len() - mapped.len(),
    ));

    let nodes: BTreeMap<&str, &BTreeMap<String, String>> = graph
        .systems
        .iter()
        .filter_map(|n| Some((to_true(&n.id)?, &n.attrs)))
        .collect();
    rows.push(attribute_row(
        Category::SystemAttributes,
        truth
            .systems
            .iter()
            .map(|s| (&s.attrs, nodes.get(s.id.as_str()).copied())),
    ));

    let true_groups = truth.groups();
    let found_groups: BTreeSet<Option<(String, String)>> = graph
        .groups
        .iter()
        .map(|g| {
            let (a, b) = (to_true(&g.pair.0)?, to_true(&g.pair.1)?);
            Some(if a <= b { (a.into(), b.into()) } else { (b.into(), a.into()) })
        })
        .collect();
    let hit = true_groups
        .iter()
        .filter(|p| found_groups.contains(&Some((*p).clone())))
        .count();
    rows.push(ScoreRow::new(
        Category::Groups,
        true_groups.len(),
        graph.groups.len(),
        hit,
        graph.groups.len() - hit,
    ));

    let found_flows: BTreeMap<(&str, &str, &str), &BTreeMap<String, String>> = graph
        .flows()
        .filter_map(|f| {
            Some((
                (to_true(&f.sender)?, to_true(&f.receiver)?, f.interface.as_str()),
                &f.attrs,
            ))
        })
        .collect();
    let lookup = |f: &super::truth::TrueFlow| {
        found_flows
            .get(&(f.sender.as_str(), f.receiver.as_str(), f.interface.as_str()))
            .copied()
    };
    let hit = truth.flows.iter().filter(|f| lookup(f).is_some()).count();
    rows.push(ScoreRow::new(
        Category::Flows,
        truth.flows.len(),
        graph.flow_count(),
        hit,
        graph.flow_count() - hit,
    ));
    rows.push(attribute_row(
        Category::FlowAttributes,
        truth.flows.iter().map(|f| (&f.attrs, lookup(f))),
    ));

    ScoreReport { rows }
}

/// Attribute rows only look at keys the truth defines: `found` counts keys
/// present on the matched entity, `correct` those with the true value.
fn attribute_row<'a>(
    category: Category,
    pairs: impl Iterator<Item = (&'a BTreeMap<String, String>, Option<&'a BTreeMap<String, String>>)>,
) -> ScoreRow {
    let (mut expected, mut found, mut correct) = (0, 0, 0);
    for (want, got) in pairs {
        expected += want.len();
        let Some(got) = got else { continue };
        for (k, v) in want {
            match got.get(k) {
                Some(g) if g == v => {
                    found += 1;
                    correct += 1;
                }
                Some(_) => found += 1,
                None => {}
            }
        }
    }
    ScoreRow::new(category, expected, found, correct, found - correct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::run_pipeline;
    use crate::schema::{load_store, Catalog};
    use crate::sim::{generate, ScenarioConfig};

    fn scenario() -> (Vec<crate::ast::Fact>, GroundTruth) {
        generate(&ScenarioConfig {
            n_systems: 10,
            n_hosts: 5,
            n_middlewares: 1,
            n_flows: 15,
            duplication_rate: 0.5,
            rng_seed: 5,
            ..ScenarioConfig::default()
        })
        .unwrap()
    }

    fn graph(facts: &[crate::ast::Fact]) -> NetworkGraph {
        run_pipeline(&load_store(&Catalog::nim(), facts).unwrap())
    }

    #[test]
    fn perfect_reconstruction_scores_full() {
        let (facts, truth) = scenario();
        let report = score(&graph(&facts), &truth);
        for r in &report.rows {
            assert!(r.is_perfect(), "{report}");
            assert_eq!(r.percentage, 100.0);
        }
    }

    #[test]
    fn withheld_flow_is_missing() {
        let (mut facts, truth) = scenario();
        let declared = facts
            .iter()
            .position(|f| f.predicate == "msg_flow_disc" && f.str_arg(2).unwrap().starts_with("IF_"))
            .expect("scenario has a declared direct flow");
        facts.remove(declared);
        let report = score(&graph(&facts), &truth);
        let flows = report.row(Category::Flows);
        assert_eq!(flows.found, flows.expected - 1);
        assert_eq!(flows.correct, flows.expected - 1);
    }

    #[test]
    fn labels_render() {
        let (facts, truth) = scenario();
        let text = score(&graph(&facts), &truth).to_string();
        assert!(text.contains("Found expected Systems"));
        assert!(text.contains("Correct MessageFlow Attributes"));
    }
}
