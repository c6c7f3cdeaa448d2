//! Experiment front-end for the `srs` binary: config files, result tables,
//! the four subcommands and SVG figures.

pub mod commands;
pub mod config;
pub mod plot;
pub mod results;

pub use config::Config;
pub use results::ExperimentResultRow;
