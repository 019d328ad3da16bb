//! Configuration-driven experiment runner for the `greenlab` library.
//!
//! A run reads one flat TOML file, executes the named scenario, writes a JSON
//! report (plus CSV traces where a field is available) and a manifest, and
//! exits with 0 (pass), 1 (tolerance failure) or 2 (config or usage error).

pub mod config;
pub mod converge;
pub mod error;
pub mod output;
pub mod report;
pub mod scenarios;

pub use config::ExperimentConfig;
pub use error::LabError;
pub use report::{Comparison, Metric, ScenarioReport};
pub use scenarios::Scenario;
