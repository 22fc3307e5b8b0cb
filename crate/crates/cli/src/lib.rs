//! Command-line harness for the equihybrid solvers: INI run configurations,
//! CSV traces, JSON summaries and speedup reports.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod ini;
pub mod report;
pub mod trace;

pub use config::RunConfig;
pub use error::{CliError, ExitStatus};
