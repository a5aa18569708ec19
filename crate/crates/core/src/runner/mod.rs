//! Experiment grids over datasets and learners, driven by TOML configs.
//!
//! Every number in a result table can be replayed: each dataset gets its
//! own seed sub-streams derived from the master seed, and all learners on
//! that dataset share them. Tables come out byte-identical for the same
//! config and seed regardless of the worker count.

mod config;
mod experiments;
pub mod report;

pub use config::{
    CellSeeds, CvConfig, DatasetSource, ExperimentConfig, HoldoutConfig, PreparedData, ScheduleConfig,
    SweepConfig, DEFAULT_HOLDOUT_MIN_SAMPLES, DEFAULT_TEST_SAMPLES,
};
pub use experiments::{
    emit_scatter, evaluate_cell, noise_sensitivity, run_hyperparam_sweep, run_model_selection,
    run_noise_sensitivity, run_size_sweep, CellSettings, ExperimentRow, NoiseRow, ScatterPoint,
};
