//! Scenario runner for `floquet-core`: JSON configuration in, JSON/CSV
//! artifacts out.

pub mod config;
pub mod model;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_str, ConfigError, ScenarioConfig};
pub use run::{run_scenario, RunOptions, RunOutcome};
