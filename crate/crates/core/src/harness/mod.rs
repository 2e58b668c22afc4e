//! Experiment runner: the end-to-end pipeline, seeded Monte Carlo benches,
//! calibration, CSV output and SVG plots.

mod bench;
mod calibration;
mod config;
mod output;
mod pipeline;
pub mod plot;

pub use bench::{
    derive_seed, run_capacity_sweep, run_false_positive, run_robustness_bench, run_steps_sweep,
    srm_label, FalsePositiveReport, GridRun, ResultRow,
};
pub use calibration::{
    calibrate_from_fit, run_calibration, CalibrationReport, HistogramRow, MIN_CALIBRATION_SAMPLES,
};
pub use config::{default_attack_grid, ExperimentConfig};
pub use output::{read_csv, reference_header, timing_path, write_csv, write_results};
pub use pipeline::{Embedding, Pipeline};

use crate::attacks::AttackError;
use crate::circuit::CircuitError;
use crate::codec::CodecError;
use crate::diffusion::DiffusionError;
use crate::srm::SrmError;
use crate::watermark::WatermarkError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Watermark(#[from] WatermarkError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Srm(#[from] SrmError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
