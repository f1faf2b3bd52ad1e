//! Scenario files, CSV artifacts and the command-line driver around
//! [`neurofield_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Built, ScenarioFile};
pub use error::{CliError, CliResult};
