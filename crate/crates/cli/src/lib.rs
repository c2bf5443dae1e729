//! Command-line runner: experiment presets, the verification suite and
//! deterministic output files.

pub mod cases;
pub mod config;
pub mod emit;
pub mod error;
pub mod verify;

pub use cases::run_case;
pub use config::{Case, RunConfig};
pub use emit::{Check, RunArtifacts};
pub use error::{CliError, CliResult};
