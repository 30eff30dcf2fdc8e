//! Scenario files, subcommands and output writers for the `agn` tool.

pub mod app;
pub mod manifest;
pub mod output;
pub mod runs;
pub mod scenario;
pub mod svg;
pub mod units;
