//! Experiment tool for k-level policy gradients on small differentiable
//! and tabular games.
//!
//! Three subcommands cover the workflow:
//!
//! - `run` executes the configured experiment and writes a trace CSV plus
//!   a fully-resolved config echo;
//! - `verify` runs one of the three convergence-certificate suites and
//!   prints a machine-readable verdict line;
//! - `plot` renders a trace as a deterministic SVG chart.
//!
//! The library half exposes each command as a function so tests drive
//! them in-process; the binary is a thin argument-parsing shell.

pub mod config;
pub mod csvio;
pub mod error;
pub mod plot;
pub mod run;
pub mod svg;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::LabError;
pub use plot::{cmd_plot, PlotKind};
pub use run::{cmd_run, RunArtifacts};
pub use verify::{cmd_verify, VerifyArtifacts};
