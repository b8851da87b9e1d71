//! Command-line front end: argument definitions, layered run settings and
//! the subcommand implementations used by the `tripsel` binary.

pub mod args;
pub mod commands;
pub mod settings;

pub use args::Cli;
pub use commands::run;
pub use settings::{Preset, Settings};
