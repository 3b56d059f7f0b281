//! Evaluates the bundled equivalence listing over a few hand-written facts
//! and prints what was derived.
//!
//!     cargo run --example eval_listings

use nimlog::engine::{evaluate, FactStore, Origin};
use nimlog::inference::listings;
use nimlog::parser::{parse_fact_file, parse_program};

const FACTS: &str = r#"
% two records of the same SAP system, one per discovery source
same_sys_disc("SLD:ERP", "CMDB:erp-prod").
same_sys_disc("CMDB:erp-prod", "ERP").
runs_on_disc("SLD:ERP", "vm17").
runs_on_disc("ERP", "vm17.corp.local").
"#;

fn main() {
    let program = parse_program(listings::EQUIVALENCE).expect("bundled listing parses");
    let facts = parse_fact_file(FACTS).expect("facts parse");

    let mut store = FactStore::new();
    store.ingest_snapshot(&facts, Origin::Discovered).unwrap();
    let result = evaluate(&program, &store).unwrap();

    for f in result.derived_facts() {
        println!("{f}.");
    }
}
