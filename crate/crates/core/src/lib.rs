//! Synthesis, validation and evaluation of spoken-style entity transcripts.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod domain;
pub mod evaluator;
pub mod generation;
pub mod optimizer;
pub mod providers;
pub mod renderer;
pub mod similarity;
pub mod spoken_parser;
pub mod taxonomy;
pub mod validation;
