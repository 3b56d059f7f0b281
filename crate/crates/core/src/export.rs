//! JSON and DOT renderings of a reconstructed network, plus a plain-text
//! report.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::NetworkGraph;
use crate::sim::ScoreReport;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportedNetwork {
    pub schema_version: String,
    #[serde(flatten)]
    pub network: NetworkGraph,
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("invalid network JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0:?}")]
    Version(String),
}

/// Pretty JSON with object keys in sorted order.
pub fn to_json(graph: &NetworkGraph) -> String {
    let doc = ExportedNetwork {
        schema_version: SCHEMA_VERSION.to_string(),
        network: graph.clone(),
    };
    // Going through `Value` sorts keys: its map is ordered by key.
    let value = serde_json::to_value(&doc).expect("network serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<NetworkGraph, ExportError> {
    let doc: ExportedNetwork = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ExportError::Version(doc.schema_version));
    }
    Ok(doc.network)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn host_node(id: &str) -> String {
    quote(&format!("host:{id}"))
}

/// Systems as boxes, one edge per top-level connection labeled with its
/// interfaces, hosts as ellipses linked by dashed runs-on references.
pub fn to_dot(graph: &NetworkGraph) -> String {
    let mut out = String::from("digraph network {\n    rankdir=LR;\n    node [shape=box];\n");
    for s in &graph.systems {
        let label = match s.attrs.get("description") {
            Some(d) => format!("{}\n{}", s.id, d),
            None => s.id.clone(),
        };
        let _ = writeln!(out, "    {} [label={}];", quote(&s.id), quote(&label));
    }
    for h in &graph.hosts {
        let _ = writeln!(
            out,
            "    {} [shape=ellipse, label={}];",
            host_node(&h.id),
            quote(&h.id)
        );
    }
    for g in &graph.groups {
        let (a, b) = (&g.pair.0, &g.pair.1);
        let forward = g.flows.iter().any(|f| &f.sender == a);
        let backward = g.flows.iter().any(|f| &f.sender == b);
        let (from, to) = if forward { (a, b) } else { (b, a) };
        let dir = if forward && backward { "both" } else { "forward" };
        let interfaces: BTreeSet<&str> = g.flows.iter().map(|f| f.interface.as_str()).collect();
        let label = interfaces.into_iter().collect::<Vec<_>>().join("\n");
        let _ = writeln!(
            out,
            "    {} -> {} [label={}, dir={dir}];",
            quote(from),
            quote(to),
            quote(&label)
        );
    }
    for s in &graph.systems {
        for h in &s.hosts {
            let _ = writeln!(
                out,
                "    {} -> {} [style=dashed, arrowhead=none];",
                quote(&s.id),
                host_node(h)
            );
        }
    }
    out.push_str("}\n");
    out
}

/// Counts, inconsistencies and (when given) the score table.
pub fn render_report(graph: &NetworkGraph, score: Option<&ScoreReport>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "systems:          {}", graph.systems.len());
    let _ = writeln!(out, "hosts:            {}", graph.hosts.len());
    let _ = writeln!(out, "parties:          {}", graph.parties.len());
    let _ = writeln!(out, "groups:           {}", graph.groups.len());
    let _ = writeln!(out, "message flows:    {}", graph.flow_count());
    let _ = writeln!(out, "iflows:           {}", graph.iflows.len());
    let _ = writeln!(out, "host-level flows: {}", graph.host_flows.len());
    let _ = writeln!(out, "unlinked configs: {}", graph.unlinked.len());
    let _ = writeln!(out, "inconsistencies:  {}", graph.inconsistencies.len());
    for i in &graph.inconsistencies {
        let _ = writeln!(out, "  - {i}");
    }
    if let Some(score) = score {
        out.push('\n');
        out.push_str(&score.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::run_pipeline;
    use crate::schema::{load_store, Catalog};
    use crate::sim::build_paper_fixtures;

    fn hxp() -> NetworkGraph {
        let fx = build_paper_fixtures();
        run_pipeline(&load_store(&Catalog::nim(), &fx.hxp.facts).unwrap())
    }

    #[test]
    fn json_round_trip_and_sorted_keys() {
        let g = hxp();
        let text = to_json(&g);
        assert_eq!(from_json(&text).unwrap(), g);
        assert_eq!(to_json(&from_json(&text).unwrap()), text);
        let top: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = top.clone();
        sorted.sort();
        assert_eq!(top, sorted);
        assert!(top.contains(&"schema_version"));
    }

    #[test]
    fn empty_graph_exports_empty_collections() {
        let text = to_json(&NetworkGraph::default());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["systems"], serde_json::json!([]));
        assert_eq!(v["schema_version"], "1");
    }

    #[test]
    fn wrong_version_rejected() {
        let text = to_json(&NetworkGraph::default()).replace("\"1\"", "\"2\"");
        assert!(matches!(from_json(&text), Err(ExportError::Version(v)) if v == "2"));
    }

    #[test]
    fn dot_mentions_groups_and_hosts() {
        let dot = to_dot(&hxp());
        assert!(dot.starts_with("digraph network {"));
        assert!(dot.contains("\"HXP_105\" -> \"HXP_106\""));
        assert!(dot.contains("dir=both"));
        assert!(dot.contains("\"host:xxx2474\""));
        assert!(dot.contains("style=dashed"));
    }
}
