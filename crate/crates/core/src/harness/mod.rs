//! Experiment runner: configuration, sweeps, threshold read-off, statistics and
//! output files.

pub mod config;
pub mod output;
pub mod stats;
pub mod sweeps;
pub mod threshold;
pub mod verify;

pub use config::{resolve, ConfigOverrides, ExperimentConfig, Grid, Mode, OutputFormat, Precision, SweepParam};
pub use output::{emit_results, read_results, render};
pub use stats::{ks_two_sample, KsResult};
pub use sweeps::{run_field_sweep, run_noise_sweep, ReadoutBasis, SweepResult, SweepRow};
pub use threshold::{estimate_threshold, estimate_threshold_layers, run_threshold_sweeps, ThresholdEstimate};
