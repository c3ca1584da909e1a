//! Configuration-driven experiment runs over `minmax-core`, producing a
//! deterministic `report.json`, per-experiment CSV files and plot data.

pub mod catalog;
pub mod config;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Kind, Overrides};
pub use run::{run_groups, summary, Outcome};
