//! Watermark detection with synchronization restoration.
//!
//! Attacks that add or remove circuit columns shift every later latent
//! column, which scrambles the blocks the repetition code votes over.
//! Restoration re-aligns the latent by inserting (or, in bidirectional mode,
//! removing) a few all-zero columns before inversion, and keeps the first
//! candidate whose extracted message clears the threshold.

use crate::circuit::Circuit;
use crate::codec::{encode_circuit, CodecError, LatentShape, LatentTensor};
use crate::diffusion::{ddim_invert, DenoiserBackend, DiffusionError, DiffusionSchedule};
use crate::watermark::{BitSequence, DetectionPolicy, EccCode, WatermarkError, WatermarkKey};
use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SrmError {
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Watermark(#[from] WatermarkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrmDirections {
    /// Zero-column insertion only.
    #[default]
    InsertOnly,
    /// Also try deleting columns, which undoes right shifts.
    Bidirectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrmConfig {
    pub w_max: usize,
    pub directions: SrmDirections,
    pub early_stop: bool,
}

impl Default for SrmConfig {
    fn default() -> Self {
        SrmConfig {
            w_max: 3,
            directions: SrmDirections::InsertOnly,
            early_stop: true,
        }
    }
}

impl SrmConfig {
    /// Standard extraction only.
    pub fn disabled() -> Self {
        SrmConfig {
            w_max: 0,
            ..SrmConfig::default()
        }
    }

    pub fn bidirectional() -> Self {
        SrmConfig {
            directions: SrmDirections::Bidirectional,
            ..SrmConfig::default()
        }
    }

    /// Candidates enumerated before deduplication, standard included.
    pub fn candidate_count(&self, cols: usize) -> usize {
        let per_direction = (cols + 1) * self.w_max;
        match self.directions {
            SrmDirections::InsertOnly => 1 + per_direction,
            SrmDirections::Bidirectional => 1 + 2 * per_direction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftDirection {
    Insert,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    Standard,
    Shift {
        direction: ShiftDirection,
        position: usize,
        width: usize,
    },
}

/// The latent `candidate` describes.
///
/// Insert: `width` zero columns go in front of column `position` and the
/// tensor is cut back to `f_w` columns on the right. Delete: columns
/// `position..position + width` are removed and zero columns pad the right.
pub fn apply_candidate(z0: &LatentTensor, candidate: Candidate) -> LatentTensor {
    let Candidate::Shift {
        direction,
        position,
        width,
    } = candidate
    else {
        return z0.clone();
    };
    let shape = z0.shape();
    let col_len = shape.column_len();
    let position = position.min(shape.cols);
    let data = z0.data();
    let mut out = Vec::with_capacity(shape.len());
    out.extend_from_slice(&data[..position * col_len]);
    match direction {
        ShiftDirection::Insert => {
            out.resize(out.len() + width * col_len, 0.0);
            out.extend_from_slice(&data[position * col_len..]);
        }
        ShiftDirection::Delete => {
            let resume = (position + width).min(shape.cols);
            out.extend_from_slice(&data[resume * col_len..]);
        }
    }
    out.resize(shape.len(), 0.0);
    LatentTensor::from_vec(shape, out).expect("zeros and existing values are finite")
}

fn candidate_order(cfg: &SrmConfig, cols: usize) -> impl Iterator<Item = Candidate> + '_ {
    let directions: &[ShiftDirection] = match cfg.directions {
        SrmDirections::InsertOnly => &[ShiftDirection::Insert],
        SrmDirections::Bidirectional => &[ShiftDirection::Insert, ShiftDirection::Delete],
    };
    let shifts = directions.iter().flat_map(move |&direction| {
        (1..=cfg.w_max).flat_map(move |width| {
            (0..=cols).map(move |position| Candidate::Shift {
                direction,
                position,
                width,
            })
        })
    });
    std::iter::once(Candidate::Standard).chain(shifts)
}

/// Candidates in enumeration order (standard first, then by direction, width,
/// position), skipping any whose tensor equals an earlier one.
pub fn srm_candidates<'a>(
    z0: &'a LatentTensor,
    cfg: &'a SrmConfig,
) -> impl Iterator<Item = (Candidate, LatentTensor)> + 'a {
    let mut seen: HashMap<u64, Vec<Candidate>> = HashMap::new();
    candidate_order(cfg, z0.shape().cols).filter_map(move |candidate| {
        let z = apply_candidate(z0, candidate);
        let hash = data_hash(z.data());
        let bucket = seen.entry(hash).or_default();
        if bucket
            .iter()
            .any(|&earlier| apply_candidate(z0, earlier) == z)
        {
            return None;
        }
        bucket.push(candidate);
        Some((candidate, z))
    })
}

fn data_hash(data: &[f64]) -> u64 {
    let mut h = DefaultHasher::new();
    for v in data {
        // +0.0 and -0.0 compare equal, so hash them alike.
        (if *v == 0.0 { 0 } else { v.to_bits() }).hash(&mut h);
    }
    h.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub detected: bool,
    pub best_similarity: f64,
    pub best_candidate: Candidate,
    pub extracted_message: BitSequence,
    pub candidates_tried: usize,
    /// Similarity of the unshifted latent.
    pub standard_similarity: f64,
    /// Whether the circuit was wider than the latent and got cut.
    pub truncated: bool,
}

/// Detector bound to one key, policy and diffusion setup.
pub struct Detector<'a> {
    key: &'a WatermarkKey,
    policy: DetectionPolicy,
    backend: &'a dyn DenoiserBackend,
    schedule: &'a DiffusionSchedule,
    cfg: SrmConfig,
    shape: LatentShape,
    guidance: f64,
    code: EccCode,
}

impl<'a> Detector<'a> {
    pub fn new(
        key: &'a WatermarkKey,
        policy: DetectionPolicy,
        backend: &'a dyn DenoiserBackend,
        schedule: &'a DiffusionSchedule,
        cfg: SrmConfig,
        shape: LatentShape,
    ) -> Result<Self, SrmError> {
        policy.validate()?;
        if policy.n != shape.len() {
            return Err(SrmError::ConfigMismatch(format!(
                "policy n = {} but the latent holds {} values",
                policy.n,
                shape.len()
            )));
        }
        if policy.k != key.k() {
            return Err(SrmError::ConfigMismatch(format!(
                "policy k = {} but the key message has {} bits",
                policy.k,
                key.k()
            )));
        }
        let code = EccCode::new(key, policy.k, policy.n)?;
        Ok(Detector {
            key,
            policy,
            backend,
            schedule,
            cfg,
            shape,
            guidance: 0.0,
            code,
        })
    }

    pub fn with_guidance(mut self, guidance: f64) -> Self {
        self.guidance = guidance;
        self
    }

    pub fn policy(&self) -> &DetectionPolicy {
        &self.policy
    }

    /// Inverts `z0`, reads the code bits off the signs and decodes.
    pub fn extract(&self, z0: &LatentTensor) -> Result<(BitSequence, f64), SrmError> {
        let z_t = ddim_invert(z0, self.backend, self.schedule, self.guidance)?;
        let message = self.code.decode_signs(z_t.data())?;
        let matches = message.matches(&self.key.message)?;
        Ok((message, matches as f64 / self.policy.k as f64))
    }

    pub fn detect(&self, q: &Circuit) -> Result<DetectionReport, SrmError> {
        let encoded = encode_circuit(q, self.shape)?;
        let mut report = self.detect_latent(&encoded.latent)?;
        report.truncated = encoded.truncated;
        Ok(report)
    }

    pub fn detect_latent(&self, z0: &LatentTensor) -> Result<DetectionReport, SrmError> {
        if z0.shape() != self.shape {
            return Err(SrmError::ConfigMismatch(format!(
                "latent shape {:?}, detector shape {:?}",
                z0.shape(),
                self.shape
            )));
        }
        let mut best: Option<(Candidate, BitSequence, f64)> = None;
        let mut standard_similarity = 0.0;
        let mut tried = 0;
        for (candidate, z) in srm_candidates(z0, &self.cfg) {
            let (message, sim) = self.extract(&z)?;
            tried += 1;
            if candidate == Candidate::Standard {
                standard_similarity = sim;
            }
            // Every earlier candidate scored below tau, so an accepted one
            // is also the best so far.
            let accepted = self.policy.accepts(sim);
            if best.as_ref().is_none_or(|(_, _, s)| sim > *s) {
                best = Some((candidate, message, sim));
            }
            if accepted && self.cfg.early_stop {
                break;
            }
        }
        let (best_candidate, extracted_message, best_similarity) =
            best.expect("the standard candidate is always tried");
        Ok(DetectionReport {
            detected: self.policy.accepts(best_similarity),
            best_similarity,
            best_candidate,
            extracted_message,
            candidates_tried: tried,
            standard_similarity,
            truncated: false,
        })
    }
}

/// One-shot detection; see [`Detector`].
pub fn detect_watermark(
    q: &Circuit,
    key: &WatermarkKey,
    policy: DetectionPolicy,
    backend: &dyn DenoiserBackend,
    schedule: &DiffusionSchedule,
    cfg: SrmConfig,
) -> Result<DetectionReport, SrmError> {
    let shape = LatentShape::new(
        crate::codec::DEFAULT_CHANNELS,
        q.num_qubits(),
        policy.n / (crate::codec::DEFAULT_CHANNELS * q.num_qubits()),
    );
    if shape.len() != policy.n {
        return Err(SrmError::ConfigMismatch(format!(
            "n = {} is not a whole number of {}-row columns",
            policy.n,
            q.num_qubits()
        )));
    }
    Detector::new(key, policy, backend, schedule, cfg, shape)?.detect(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn columns(cols: &[f64]) -> LatentTensor {
        let shape = LatentShape::new(1, 1, cols.len());
        LatentTensor::from_vec(shape, cols.to_vec()).unwrap()
    }

    fn shift(direction: ShiftDirection, position: usize, width: usize) -> Candidate {
        Candidate::Shift {
            direction,
            position,
            width,
        }
    }

    #[test]
    fn insert_and_delete_candidates() {
        let z = columns(&[1.0, 2.0, 3.0, 4.0]);
        let ins = apply_candidate(&z, shift(ShiftDirection::Insert, 2, 1));
        assert_eq!(ins.data(), &[1.0, 2.0, 0.0, 3.0]);
        assert_eq!(apply_candidate(&z, shift(ShiftDirection::Insert, 4, 1)), z);
        let del = apply_candidate(&z, shift(ShiftDirection::Delete, 1, 2));
        assert_eq!(del.data(), &[1.0, 4.0, 0.0, 0.0]);
        let tail = apply_candidate(&z, shift(ShiftDirection::Delete, 3, 3));
        assert_eq!(tail.data(), &[1.0, 2.0, 3.0, 0.0]);
    }

    #[test]
    fn enumeration_order_and_dedup() {
        let cfg = SrmConfig::default();
        assert_eq!(cfg.candidate_count(48), 148);
        assert_eq!(candidate_order(&cfg, 48).count(), 148);
        let z = columns(&[1.0, 2.0, 3.0, 4.0]);
        let got: Vec<Candidate> = srm_candidates(&z, &cfg).map(|(c, _)| c).collect();
        assert_eq!(got[0], Candidate::Standard);
        assert_eq!(got[1], shift(ShiftDirection::Insert, 0, 1));
        // Position f_w reproduces z0 for every width.
        assert!(!got.contains(&shift(ShiftDirection::Insert, 4, 1)));
        // Once the pad reaches the right edge only the prefix matters:
        // width 2 at 3 and width 3 at 2 and 3 repeat earlier tensors.
        assert_eq!(got.len(), 1 + 4 + 3 + 2);

        let bi = SrmConfig::bidirectional();
        assert_eq!(bi.candidate_count(48), 1 + 2 * 147);
        let got: Vec<Candidate> = srm_candidates(&z, &bi).map(|(c, _)| c).collect();
        let first_delete = got
            .iter()
            .position(|c| {
                matches!(
                    c,
                    Candidate::Shift {
                        direction: ShiftDirection::Delete,
                        ..
                    }
                )
            })
            .unwrap();
        assert_eq!(first_delete, 10);
        // Deleting column 3 equals inserting a zero at 3: deduplicated.
        assert!(!got.contains(&shift(ShiftDirection::Delete, 3, 1)));
    }

    #[test]
    fn report_json() {
        let report = DetectionReport {
            detected: true,
            best_similarity: 1.0,
            best_candidate: shift(ShiftDirection::Insert, 5, 2),
            extracted_message: "0110".parse().unwrap(),
            candidates_tried: 3,
            standard_similarity: 0.5,
            truncated: false,
        };
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains(r#""extracted_message":"0110""#));
        assert!(json.contains(r#""direction":"insert""#));
        let standard = serde_json::to_string(&Candidate::Standard).unwrap();
        assert_eq!(standard, r#""standard""#);
        assert_eq!(
            serde_json::from_str::<DetectionReport>(&json).unwrap(),
            report
        );
    }
}
