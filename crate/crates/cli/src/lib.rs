//! Command-line front end: graph and experiment files, pipelines, CSV output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod graph_file;
pub mod output;
pub mod run;

pub use config::{Command, RunConfig};
pub use error::{CliError, CliResult};
pub use graph_file::{parse_graph_file, parse_graph_str};
pub use run::{run, RunOutcome};
