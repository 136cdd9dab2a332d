//! Configuration-driven experiments and their on-disk artifacts.

pub mod cli;
pub mod config;
pub mod output;
pub mod runner;

pub use config::{
    config_template, load_config, parse_config, ConstraintKind, ExperimentConfig, ExperimentKind, NoiseSpec,
    SweepPoint, Validated,
};
pub use output::{curve_csv, plot_script, summary_toml, write_outputs, write_predictions};
pub use runner::{predict, run_experiment, stationary_scenario, tracking_scenario, Curve, ExperimentOutput, Prediction};
