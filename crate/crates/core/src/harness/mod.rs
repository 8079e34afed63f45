//! Experiment plumbing: configs, the Monte Carlo runner, the concentration
//! bench, and trace persistence.

pub mod concentration;
pub mod config;
pub mod output;
pub mod runner;

pub use concentration::{run_concentration, ConcentrationReport, DeviationProbe};
pub use config::{
    default_checkpoints, load_config, EstimatorConfig, ExperimentConfig, InstanceConfig,
    OutputConfig, OutputFormat, PolicyConfig, PreparedExperiment,
};
pub use output::{trace_to_csv, trace_to_json, write_trace};
pub use runner::{run_experiment, run_experiment_with_workers, RegretTrace};
