//! Scenario files, initial data, the time loop, convergence studies and CSV
//! output.

pub mod config;
pub mod convergence;
pub mod ic;
pub mod oscillation;
pub mod output;
pub mod run;

pub use config::{InitialCondition, OutputConfig, ScenarioConfig, VariantConfig};
pub use convergence::{convergence_order, Axis, OrderRow};
pub use ic::{gaussian_ic, stationary_ic};
pub use oscillation::{oscillation_report, OscillationReport};
pub use run::{run_scenario, RunResult, StopReason};
