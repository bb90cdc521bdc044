//! Baseline coders and experiment drivers.

pub mod experiment;
pub mod range_coder;

pub use experiment::{
    rows_to_csv, run_simulation, run_theoretical, seed_comment, trial_sequence, Coder, ExperimentConfig,
    ExperimentRow, SimulationConfig, CSV_HEADER, GENERATOR,
};
pub use range_coder::{range_decode, range_encode, FrequencyTable};
