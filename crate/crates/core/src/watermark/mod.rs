//! Message coding, the symmetric sampler, similarity, and detection
//! thresholds.

mod bits;
mod ecc;
mod key;
mod ssm;
mod threshold;

pub use bits::{similarity, BitSequence};
pub use ecc::{ecc_decode, ecc_encode, EccCode};
pub use key::{keystream, keystream_bytes, WatermarkKey};
pub use ssm::{fold_into_partitions, gaussian_draws, reverse_sample, ssm_sample};
pub use threshold::{
    binomial_tail_count, fpr_binomial, fpr_binomial_beta, min_tau_bits, np_calibrate, np_threshold,
    CalibrationResult, DetectionPolicy, GaussianFit, DEFAULT_ALPHA0, DEFAULT_K, DEFAULT_TAU,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WatermarkError {
    #[error("message length {k} does not divide codeword length {n}")]
    IndivisibleCapacity { k: usize, n: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("bit sequences must be non-empty")]
    EmptySequence,
    #[error("invalid bit character {0:?}")]
    InvalidBit(char),
    #[error("alpha0 must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("invalid Gaussian fit: {0}")]
    InvalidFit(String),
    #[error("invalid detection policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
