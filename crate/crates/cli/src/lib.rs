//! Configuration, execution and output plumbing behind the `rfwm` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_as, ConfigError, ConfigErrors, RunConfig, Scenario};
pub use run::{execute, RunError, RunReport, RunSettings};
