//! Experiment runner for cycle-walk training: named presets, parallel
//! sample fan-out, aggregate tables, and exact-synthesis checks.

pub mod error;
pub mod preset;
pub mod report;
pub mod run;
pub mod synth;

pub use error::{CliError, Result};
pub use preset::{ExperimentPreset, TablePolicy, TargetKind};
pub use report::{RunReport, SampleResult};
pub use run::{run_preset, run_sweep};
pub use synth::{run_synthesis_check, SynthesisReport};
