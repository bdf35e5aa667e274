//! Monte-Carlo NMSE experiments, built-in presets and CSV output.

mod config;
mod map;
mod presets;
mod runner;

pub use config::{nearest_odd, EstimatorKind, ExperimentConfig, SweepVariable};
pub use map::{variance_map_csv, variance_map_export, MapConfig};
pub use presets::{preset, preset_names, Preset};
pub use runner::{
    results_csv, run_experiment, run_trial, sweep_geometries, EstimatorOutcome, Experiment, ExperimentOutput,
    ResultRow, SweepPoint, TrialOutcome, CSV_HEADER,
};
