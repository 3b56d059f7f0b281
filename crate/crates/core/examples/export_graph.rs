//! Writes the reconstructed HXP landscape as JSON and Graphviz DOT into a
//! directory (default: the system temp dir).
//!
//!     cargo run --example export_graph -- /tmp/hxp
//!     dot -Tsvg /tmp/hxp/network.dot > hxp.svg

use std::path::PathBuf;

use nimlog::export::{from_json, to_dot, to_json};
use nimlog::inference::run_pipeline;
use nimlog::schema::{load_store, Catalog};
use nimlog::sim::build_paper_fixtures;

fn main() -> std::io::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;

    let fx = build_paper_fixtures().hxp;
    let graph = run_pipeline(&load_store(&Catalog::nim(), &fx.facts).unwrap());

    let json = to_json(&graph);
    assert_eq!(from_json(&json).unwrap(), graph, "json round-trips");
    std::fs::write(dir.join("network.json"), &json)?;
    std::fs::write(dir.join("network.dot"), to_dot(&graph))?;
    println!(
        "wrote {} systems and {} connection groups to {}",
        graph.systems.len(),
        graph.groups.len(),
        dir.display()
    );
    Ok(())
}
