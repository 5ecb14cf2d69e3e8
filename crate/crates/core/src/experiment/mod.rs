//! Config-driven runs, domain sweeps and the validation commands behind the CLI.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{NormConfig, ReadoutConfig, RunConfig, RunMode};
pub use output::{read_trajectory, TrajectoryRecord, SCHEMA_VERSION, TRAJECTORY_HEADER};
pub use runner::{
    build_hamiltonian, ground_state_report, run_experiment, sweep_domains, validate_hamiltonian,
    GroundStateReport, HamiltonianReport, RunOutcome, Summary, SweepOutcome,
};
