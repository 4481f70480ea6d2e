//! Scenario runner for the sequence-prediction laboratory: configuration,
//! deterministic output files, and the six experiment campaigns.

pub mod config;
pub mod output;
pub mod scenarios;
pub mod summary;
