//! Scenario harness: data generation, scenario runs, metrics and outputs.

pub mod datagen;
pub mod run;
pub mod scenario;
pub mod commands;
pub mod output;
