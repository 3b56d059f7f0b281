//! Three discovery snapshots of the same landscape. Records that vanish
//! between runs are marked outdated but kept while a current derived fact
//! still rests on them; collection drops them once nothing does.
//!
//!     cargo run --example outdating_lifecycle

use nimlog::ast::Fact;
use nimlog::engine::{evaluate, FactStore, Origin};
use nimlog::inference::listings;
use nimlog::parser::parse_program;

fn show(label: &str, store: &FactStore) {
    println!("-- {label}");
    for (_, f) in store.iter() {
        let mark = if f.outdated { " (outdated)" } else { "" };
        println!("   [{}] {}{mark}", f.origin, f.fact);
    }
}

fn main() {
    let program = parse_program(listings::EQUIVALENCE).unwrap();
    let first = [
        Fact::strs("same_sys_disc", &["A", "B"]),
        Fact::strs("same_sys_disc", &["B", "C"]),
    ];
    let second = [Fact::strs("same_sys_disc", &["A", "B"])];

    let mut store = FactStore::new();
    store.ingest_snapshot(&first, Origin::Discovered).unwrap();
    let store = evaluate(&program, &store).unwrap();
    show("after first snapshot", &store);

    let mut store = store;
    store.ingest_snapshot(&second, Origin::Discovered).unwrap();
    let store = evaluate(&program, &store).unwrap();
    show("after second snapshot", &store);

    // B-C still supports the current same_sys("A", "C"), so it survives.
    show("after collection", &store.collect_unreferenced());

    let third = [Fact::strs("same_sys_disc", &["D", "E"])];
    let mut store = store;
    store.ingest_snapshot(&third, Origin::Discovered).unwrap();
    let store = evaluate(&program, &store).unwrap();
    show("after third snapshot and collection", &store.collect_unreferenced());
}
