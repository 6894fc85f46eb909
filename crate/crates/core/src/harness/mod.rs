//! Reproducible Monte Carlo experiments.

pub mod experiments;
pub mod rng;
pub mod scenario;
pub mod trials;

pub use experiments::{run_experiment, CsvTable, Experiment, ExperimentOutput};
pub use scenario::Scenario;
pub use trials::{run_ba_trials, run_eve_detection, BaMode, EveReport, RocPoint, TrialReport};
