//! Stratified Datalog engine and reconstruction of integration networks
//! from network-mining raw facts.
//!
//! - [`parser`] and [`ast`]: the rule and fact language.
//! - [`engine`]: fact store, stratification, naive and semi-naive evaluation.
//! - [`schema`]: the predicate catalog raw facts are validated against.
//! - [`inference`]: the rule-driven pipeline producing a [`inference::NetworkGraph`].
//! - [`sim`]: synthetic landscapes, shipped testbed fixtures and scoring.
//! - [`export`] and [`cli`]: JSON/DOT output and the `nimlog` command.

pub mod ast;
pub mod cli;
pub mod engine;
pub mod export;
pub mod inference;
pub mod parser;
pub mod schema;
pub mod sim;
