//! Seeded Monte Carlo over the full ALCC round.

pub mod config;
pub mod csv;
pub mod pep;
pub mod stats;
pub mod sweep;
pub mod trial;

pub use config::{
    Axis, CountMode, DatasetGen, DecoderConfig, DecoderMode, Distribution, ExperimentConfig,
    PrecisionConfig, PrecisionMode, SweepConfig,
};
pub use pep::{pep_experiment, PepEstimate};
pub use sweep::{run_sweep, CurvePoint, CurveRow, CurveSet};
pub use trial::{run_trial, StageTimings, TrialResult};
