//! Runs the inference pipeline on the two bundled landscapes and scores the
//! result against their recorded ground truth.
//!
//!     cargo run --example infer_fixtures

use nimlog::export::render_report;
use nimlog::inference::run_pipeline;
use nimlog::schema::{load_store, Catalog};
use nimlog::sim::{build_paper_fixtures, score};

fn main() {
    let fixtures = build_paper_fixtures();
    let catalog = Catalog::nim();
    for fx in [&fixtures.hxp, &fixtures.h73] {
        let store = load_store(&catalog, &fx.facts).expect("fixture facts are valid");
        let graph = run_pipeline(&store);
        let report = score(&graph, &fx.truth);
        println!("== {} ({} raw facts)", fx.name, fx.facts.len());
        print!("{}", render_report(&graph, Some(&report)));
        println!();
    }
}
