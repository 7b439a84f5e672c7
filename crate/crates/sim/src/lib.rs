//! Scenario files, artifact emission and brute-force oracles for
//! `kcover-core`, plus the pieces behind the `kcover` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod density;
pub mod expr;
pub mod io;
pub mod oracle;
pub mod scenario;
pub mod svg;

pub use cli::CliError;
pub use io::{PartitionDocument, RunSummary};
pub use scenario::{Scenario, ScenarioError, SensorSource};
