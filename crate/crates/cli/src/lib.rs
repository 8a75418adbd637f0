//! Command-line front end of `modbath`: argument and config parsing,
//! scenario runs and CSV output.

pub mod args;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, Scenario, ScenarioConfig};
pub use error::CliError;
pub use run::{run_scenario, RunReport};
