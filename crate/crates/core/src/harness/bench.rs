use super::{ExperimentConfig, HarnessError, Pipeline};
use crate::attacks::{apply_attack, AttackKind, AttackSpec};
use crate::diffusion::ddim_invert;
use crate::srm::{SrmConfig, SrmDirections};
use crate::watermark::{fpr_binomial, DetectionPolicy, EccCode, WatermarkKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::time::Instant;

/// Per-trial seed: the first 8 bytes (little-endian) of
/// `SHA-256(master_seed ‖ index)`, both as little-endian `u64`.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let digest = Sha256::new()
        .chain_update(master_seed.to_le_bytes())
        .chain_update(index.to_le_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// One aggregated grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub backend: String,
    pub steps: usize,
    pub attack: String,
    pub count: usize,
    pub capacity: usize,
    pub tau_bits: usize,
    pub srm: String,
    pub trials: usize,
    pub detections: usize,
    pub tpr: f64,
    pub detections_no_srm: usize,
    pub tpr_no_srm: f64,
    pub mean_bit_accuracy: f64,
    pub mean_candidates: f64,
    pub mean_gate_count: f64,
    pub mean_sign_agreement: f64,
    /// Kept out of the main CSV so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Short description of an SRM setting, e.g. `insert_only/w3`.
pub fn srm_label(cfg: &SrmConfig) -> String {
    if cfg.w_max == 0 {
        return "off".into();
    }
    let dir = match cfg.directions {
        SrmDirections::InsertOnly => "insert_only",
        SrmDirections::Bidirectional => "bidirectional",
    };
    format!("{dir}/w{}", cfg.w_max)
}

#[derive(Debug, Clone, Copy, Default)]
struct CellOutcome {
    detected: bool,
    detected_standard: bool,
    similarity: f64,
    candidates: usize,
    gates: usize,
    seconds: f64,
}

/// What one grid run needs besides the pipeline.
pub struct GridRun<'a> {
    pub experiment: &'a str,
    pub pipeline: &'a Pipeline,
    pub policy: DetectionPolicy,
    pub srm: SrmConfig,
    pub attacks: &'a [AttackSpec],
    pub trials: usize,
    pub master_seed: u64,
}

impl GridRun<'_> {
    /// Embeds one fresh watermark per trial, applies every attack in the grid
    /// to it and detects. Rows follow the grid order.
    pub fn run(&self) -> Result<Vec<ResultRow>, HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::ConfigInvalid(
                "trials must be at least 1".into(),
            ));
        }
        let per_trial: Vec<(f64, Vec<CellOutcome>)> = (0..self.trials as u64)
            .into_par_iter()
            .map(|i| self.trial(derive_seed(self.master_seed, i)))
            .collect::<Result<_, _>>()?;

        let n = self.trials as f64;
        let agreement = per_trial.iter().map(|(a, _)| a).sum::<f64>() / n;
        let rows = self
            .attacks
            .iter()
            .enumerate()
            .map(|(cell, spec)| {
                let outcomes = per_trial.iter().map(|(_, cells)| cells[cell]);
                let mut row = ResultRow {
                    experiment: self.experiment.to_string(),
                    backend: self.pipeline.backend_spec().to_string(),
                    steps: self.pipeline.schedule().steps(),
                    attack: spec.label(),
                    count: spec.count,
                    capacity: self.policy.k,
                    tau_bits: self.policy.tau_bits(),
                    srm: srm_label(&self.srm),
                    trials: self.trials,
                    detections: 0,
                    tpr: 0.0,
                    detections_no_srm: 0,
                    tpr_no_srm: 0.0,
                    mean_bit_accuracy: 0.0,
                    mean_candidates: 0.0,
                    mean_gate_count: 0.0,
                    mean_sign_agreement: agreement,
                    wall_time_s: 0.0,
                };
                for o in outcomes {
                    row.detections += o.detected as usize;
                    row.detections_no_srm += o.detected_standard as usize;
                    row.mean_bit_accuracy += o.similarity;
                    row.mean_candidates += o.candidates as f64;
                    row.mean_gate_count += o.gates as f64;
                    row.wall_time_s += o.seconds;
                }
                row.tpr = row.detections as f64 / n;
                row.tpr_no_srm = row.detections_no_srm as f64 / n;
                row.mean_bit_accuracy /= n;
                row.mean_candidates /= n;
                row.mean_gate_count /= n;
                row
            })
            .collect();
        Ok(rows)
    }

    fn trial(&self, seed: u64) -> Result<(f64, Vec<CellOutcome>), HarnessError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let key = WatermarkKey::generate(&mut rng, self.policy.k)?;
        let p = self.pipeline;
        let code = EccCode::new(&key, self.policy.k, self.policy.n)?;
        let embedding = p.embed_with(&key, &code)?;
        let inverted = ddim_invert(&embedding.z_0, p.backend(), p.schedule(), p.guidance())?;
        let agreement = inverted.sign_agreement(&embedding.z_t);
        let detector = p.detector(&key, self.policy, self.srm)?;

        let mut cells = Vec::with_capacity(self.attacks.len());
        for spec in self.attacks {
            let start = Instant::now();
            let spec = spec.with_seed(derive_seed(seed, spec.seed));
            let attacked = apply_attack(&embedding.circuit, &spec)?;
            let report = detector.detect(&attacked)?;
            cells.push(CellOutcome {
                detected: report.detected,
                detected_standard: self.policy.accepts(report.standard_similarity),
                similarity: report.best_similarity,
                candidates: report.candidates_tried,
                gates: attacked.gate_count(),
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        Ok((agreement, cells))
    }
}

fn pipeline_for(cfg: &ExperimentConfig, steps: usize) -> Result<Pipeline, HarnessError> {
    Pipeline::new(cfg.backend, steps, cfg.guidance, cfg.shape)
}

/// Every attack in `cfg.attacks` at the configured capacity and threshold.
pub fn run_robustness_bench(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    cfg.validate()?;
    let pipeline = pipeline_for(cfg, cfg.steps)?;
    GridRun {
        experiment: "robustness",
        pipeline: &pipeline,
        policy: cfg.policy()?,
        srm: cfg.srm,
        attacks: &cfg.attacks,
        trials: cfg.trials,
        master_seed: cfg.master_seed,
    }
    .run()
}

/// Clean and replacement cells at each capacity, each with the smallest
/// threshold that keeps the binomial false-positive rate within `alpha0`.
pub fn run_capacity_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    cfg.validate()?;
    let n = cfg.shape.len();
    let policies = cfg
        .capacities
        .iter()
        .map(|&k| DetectionPolicy::for_capacity(k, n, cfg.alpha0))
        .collect::<Result<Vec<_>, _>>()?;
    let mut attacks: Vec<AttackSpec> = cfg
        .attacks
        .iter()
        .filter(|a| matches!(a.kind, AttackKind::None | AttackKind::Replace))
        .copied()
        .collect();
    if attacks.is_empty() {
        attacks.push(AttackSpec::none());
        attacks.extend((1..=5).map(|c| AttackSpec::new(AttackKind::Replace, c, 0)));
    }
    let pipeline = pipeline_for(cfg, cfg.steps)?;
    let mut rows = Vec::new();
    for policy in policies {
        rows.extend(
            GridRun {
                experiment: "capacity",
                pipeline: &pipeline,
                policy,
                srm: cfg.srm,
                attacks: &attacks,
                trials: cfg.trials,
                master_seed: cfg.master_seed,
            }
            .run()?,
        );
    }
    Ok(rows)
}

/// The attack grid at each step count in `cfg.step_sweep`.
pub fn run_steps_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &steps in &cfg.step_sweep {
        let pipeline = pipeline_for(cfg, steps)?;
        rows.extend(
            GridRun {
                experiment: "steps",
                pipeline: &pipeline,
                policy: cfg.policy()?,
                srm: cfg.srm,
                attacks: &cfg.attacks,
                trials: cfg.trials,
                master_seed: cfg.master_seed,
            }
            .run()?,
        );
    }
    Ok(rows)
}

/// False accepts over circuits generated without a watermark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsePositiveReport {
    pub trials: usize,
    pub srm: String,
    pub standard_accepts: usize,
    pub family_accepts: usize,
    pub standard_rate: f64,
    pub family_rate: f64,
    pub mean_candidates: f64,
    /// `fpr_binomial(tau_bits, k)`.
    pub per_candidate_fpr: f64,
    /// `candidate_count · per_candidate_fpr`.
    pub union_bound: f64,
}

pub fn run_false_positive(cfg: &ExperimentConfig) -> Result<FalsePositiveReport, HarnessError> {
    cfg.validate()?;
    let pipeline = pipeline_for(cfg, cfg.steps)?;
    let policy = cfg.policy()?;
    let outcomes: Vec<(bool, bool, usize)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| -> Result<_, HarnessError> {
            let seed = derive_seed(cfg.master_seed, i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let key = WatermarkKey::generate(&mut rng, policy.k)?;
            let circuit = pipeline.generate_unwatermarked(derive_seed(seed, 1))?;
            let report = pipeline.detector(&key, policy, cfg.srm)?.detect(&circuit)?;
            Ok((
                policy.accepts(report.standard_similarity),
                report.detected,
                report.candidates_tried,
            ))
        })
        .collect::<Result<_, _>>()?;
    let n = cfg.trials as f64;
    let standard_accepts = outcomes.iter().filter(|o| o.0).count();
    let family_accepts = outcomes.iter().filter(|o| o.1).count();
    let per_candidate_fpr = fpr_binomial(policy.tau_bits(), policy.k);
    Ok(FalsePositiveReport {
        trials: cfg.trials,
        srm: srm_label(&cfg.srm),
        standard_accepts,
        family_accepts,
        standard_rate: standard_accepts as f64 / n,
        family_rate: family_accepts as f64 / n,
        mean_candidates: outcomes.iter().map(|o| o.2 as f64).sum::<f64>() / n,
        per_candidate_fpr,
        union_bound: cfg.srm.candidate_count(cfg.shape.cols) as f64 * per_candidate_fpr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(1, 2), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 2), derive_seed(2, 1));
        let digest = Sha256::digest([1u64.to_le_bytes(), 2u64.to_le_bytes()].concat());
        assert_eq!(
            derive_seed(1, 2),
            u64::from_le_bytes(digest[..8].try_into().unwrap())
        );
    }

    #[test]
    fn clean_zero_noise_is_exact() {
        let cfg = ExperimentConfig {
            trials: 20,
            attacks: vec![
                AttackSpec::none(),
                AttackSpec::new(AttackKind::Append, 2, 0),
            ],
            ..ExperimentConfig::default()
        };
        let rows = run_robustness_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].tpr, 1.0);
        // Partner-group repair in the decoder costs the odd message bit.
        assert!(rows[0].mean_bit_accuracy > 0.97);
        assert_eq!(rows[0].mean_sign_agreement, 1.0);
        for row in &rows {
            assert_eq!(row.tpr, row.detections as f64 / row.trials as f64);
        }
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = ExperimentConfig {
            trials: 0,
            ..ExperimentConfig::default()
        };
        assert!(matches!(
            run_robustness_bench(&cfg),
            Err(HarnessError::ConfigInvalid(_))
        ));
    }

    #[test]
    fn capacity_sweep_clean_rows() {
        let cfg = ExperimentConfig {
            trials: 100,
            attacks: vec![AttackSpec::none()],
            ..ExperimentConfig::default()
        };
        let rows = run_capacity_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 5);
        for (row, v) in rows.iter().zip([128, 96, 64, 48, 32]) {
            assert_eq!(1536 / row.capacity, v);
            assert_eq!(row.tpr, 1.0, "k = {}", row.capacity);
            assert!(fpr_binomial(row.tau_bits, row.capacity) <= 1e-3);
            assert!(fpr_binomial(row.tau_bits - 1, row.capacity) > 1e-3);
        }
    }

    #[test]
    fn steps_sweep_rows_follow_the_sweep() {
        let cfg = ExperimentConfig {
            trials: 10,
            backend: crate::diffusion::BackendSpec::Linear(1),
            attacks: vec![AttackSpec::none()],
            step_sweep: vec![10, 100],
            ..ExperimentConfig::default()
        };
        let rows = run_steps_sweep(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.steps).collect::<Vec<_>>(), [10, 100]);
        assert!(rows[1].mean_sign_agreement > rows[0].mean_sign_agreement);
    }

    #[test]
    fn capacity_sweep_rejects_indivisible() {
        let cfg = ExperimentConfig {
            trials: 2,
            capacities: vec![24, 25],
            ..ExperimentConfig::default()
        };
        assert!(matches!(
            run_capacity_sweep(&cfg),
            Err(HarnessError::Watermark(
                crate::watermark::WatermarkError::IndivisibleCapacity { .. }
            ))
        ));
    }
}
