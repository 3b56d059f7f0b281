//! Synthetic integration landscapes: generation of fragmented raw facts with
//! known ground truth, the shipped testbed fixtures, and scoring of
//! reconstructed networks.

mod fixtures;
mod generate;
mod score;
mod truth;

pub use fixtures::{build_paper_fixtures, Fixture, PaperFixtures};
pub use generate::{generate, ScenarioConfig, ScenarioError};
pub use score::{score, Category, ScoreReport, ScoreRow};
pub use truth::{GroundTruth, TrueFlow, TrueHost, TrueIFlow, TrueSystem};
