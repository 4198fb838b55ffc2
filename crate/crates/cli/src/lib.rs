//! Command-line front end: JSON body specs, subcommands and CSV/JSON output.

pub mod body_spec;
pub mod commands;
pub mod output;
