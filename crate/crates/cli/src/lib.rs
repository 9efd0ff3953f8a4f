//! Experiment specs, presets and output writing for the atomlight
//! command-line harness.

pub mod run;
pub mod spec;

pub use run::{run_experiment, simulate, RunError, OUT_DIR_ENV};
pub use spec::{parse_spec, render, ExperimentSpec, Preset, SpecError};
