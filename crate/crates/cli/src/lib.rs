//! Command-line front end for the `gradspace` solvers: problem files in,
//! `report.toml` and CSV fields out.

pub mod certify;
pub mod commands;
pub mod error;
pub mod problem;
pub mod report;
pub mod run;
pub mod selftest;

pub use error::{CliError, Result};
pub use problem::ProblemFile;
