//! Sweeps the duplication rate of a generated landscape and shows that
//! reconstruction stays exact while raw record counts grow.
//!
//!     cargo run --release --example simulate_and_score

use nimlog::inference::run_pipeline;
use nimlog::schema::{load_store, Catalog};
use nimlog::sim::{generate, score, Category, ScenarioConfig};

fn main() {
    let catalog = Catalog::nim();
    println!("{:>5} {:>7} {:>8} {:>8} {:>8}", "dup", "facts", "systems", "flows", "groups");
    for dup in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let config = ScenarioConfig {
            n_systems: 200,
            n_hosts: 80,
            n_middlewares: 4,
            n_flows: 600,
            duplication_rate: dup,
            rng_seed: 2024,
            ..ScenarioConfig::default()
        };
        let (facts, truth) = generate(&config).expect("feasible scenario");
        let graph = run_pipeline(&load_store(&catalog, &facts).unwrap());
        let report = score(&graph, &truth);
        let pct = |c| report.row(c).percentage;
        println!(
            "{dup:>5.2} {:>7} {:>7.1}% {:>7.1}% {:>7.1}%",
            facts.len(),
            pct(Category::Systems),
            pct(Category::Flows),
            pct(Category::Groups),
        );
    }
}
