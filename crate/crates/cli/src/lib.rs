//! Command-line front end: ingestion, test runs, null tables, power studies
//! and the synthetic experiments.

pub mod args;
pub mod data;
pub mod error;
pub mod illustrate;
pub mod ingest;
mod run;

pub use args::{Cli, Command, GlobalOpts};
pub use error::{CliError, Result};
pub use run::{parse_shapes, parse_values, run, write_outputs, Outputs};
