//! Command-line front end for `tpoly-core`: run configuration, versioned
//! JSON envelopes, SVG figures and the verification battery.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod svg;
pub mod verify;

pub use app::{run, Cli, Command};
pub use config::RunConfig;
pub use error::CliError;
pub use report::{Check, Provenance, Status, VerifyReport};
