pub mod cli;
pub mod classifiers;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod graph;
pub mod parser;
pub mod stats;
