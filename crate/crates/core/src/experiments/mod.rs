//! Experiment drivers shared by the command-line tool and the tests.
//!
//! Each command takes an [`ExperimentConfig`] and returns a serializable
//! report that renders as JSON or CSV.

pub mod checks;
pub mod commands;
pub mod config;
pub mod report;

pub use commands::{
    convergence, microsim, params_report, sample, simulate_full, simulate_reduced, sweep_t1, sweep_t2,
    verify, CheckOutcome, ConvergenceReport, ConvergenceRow, FullSimulation, FullSimulationReport,
    MicrosimReport, ReducedSimulation, RunReport, SampleReport, SweepT1Report, SweepT2Report, VerifyReport,
};
pub use config::{ExperimentConfig, OutputFormat};
pub use report::{float_cell, CsvTable, Provenance, Report, TOOL, VERSION};
