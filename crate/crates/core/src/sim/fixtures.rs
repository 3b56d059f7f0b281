//! The two middleware testbeds, shipped as `.facts` files with their truth.

use crate::ast::Fact;
use crate::parser::parse_fact_file;

use super::truth::GroundTruth;

const HXP_FACTS: &str = include_str!("../../fixtures/hxp.facts");
const HXP_TRUTH: &str = include_str!("../../fixtures/hxp.truth.json");
const H73_FACTS: &str = include_str!("../../fixtures/h73.facts");
const H73_TRUTH: &str = include_str!("../../fixtures/h73.truth.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    pub facts: Vec<Fact>,
    pub truth: GroundTruth,
}

impl Fixture {
    fn load(name: &'static str, facts: &str, truth: &str) -> Self {
        Fixture {
            name,
            facts: parse_fact_file(facts).expect("shipped fixture parses"),
            truth: serde_json::from_str(truth).expect("shipped truth parses"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperFixtures {
    pub hxp: Fixture,
    pub h73: Fixture,
}

impl PaperFixtures {
    /// Both testbeds as one landscape.
    pub fn combined(&self) -> Fixture {
        Fixture {
            name: "HXP+H73",
            facts: self.hxp.facts.iter().chain(&self.h73.facts).cloned().collect(),
            truth: self.hxp.truth.merged(&self.h73.truth),
        }
    }
}

pub fn build_paper_fixtures() -> PaperFixtures {
    PaperFixtures {
        hxp: Fixture::load("HXP", HXP_FACTS, HXP_TRUTH),
        h73: Fixture::load("H73", H73_FACTS, H73_TRUTH),
    }
}
