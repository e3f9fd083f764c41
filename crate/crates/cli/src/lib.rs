//! Config-driven experiment runner for the `nilgrowth` library.
//!
//! A config file holds one scenario or an array of them. Each scenario
//! writes `<name>.json` (the typed report plus plot series) and
//! `<name>.csv` into the output directory.

pub mod artifact;
pub mod config;
pub mod error;
pub mod plot;
pub mod run;

pub use config::{load, parse, Scenario, ScenarioConfig};
pub use error::CliError;
pub use run::{run_scenario, Outcome, Overrides, Report};
