use super::HarnessError;
use crate::attacks::{AttackKind, AttackSpec};
use crate::codec::LatentShape;
use crate::diffusion::{BackendSpec, DEFAULT_STEPS};
use crate::srm::SrmConfig;
use crate::watermark::{DetectionPolicy, DEFAULT_ALPHA0, DEFAULT_K, DEFAULT_TAU};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Everything a bench run depends on. Every field has a default, so a config
/// file only needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub backend: BackendSpec,
    pub steps: usize,
    pub guidance: f64,
    pub capacity: usize,
    pub tau: f64,
    pub alpha0: f64,
    pub shape: LatentShape,
    pub attacks: Vec<AttackSpec>,
    pub srm: SrmConfig,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub calibration_samples: usize,
    pub capacities: Vec<usize>,
    pub step_sweep: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: 1000,
            backend: BackendSpec::Zero,
            steps: DEFAULT_STEPS,
            guidance: 7.5,
            capacity: DEFAULT_K,
            tau: DEFAULT_TAU,
            alpha0: DEFAULT_ALPHA0,
            shape: LatentShape::default(),
            attacks: default_attack_grid(),
            srm: SrmConfig::default(),
            master_seed: 0,
            output: None,
            calibration_samples: 2000,
            capacities: vec![12, 16, 24, 32, 48],
            step_sweep: vec![10, 25, 50, 100],
        }
    }
}

/// Clean baseline, then replacement 1–5, strict append 1–5, insertion 1–2
/// pairs and deletion 1–3 gates.
pub fn default_attack_grid() -> Vec<AttackSpec> {
    let mut grid = vec![AttackSpec::none()];
    for (kind, max) in [
        (AttackKind::Replace, 5),
        (AttackKind::Append, 5),
        (AttackKind::Insert, 2),
        (AttackKind::Delete, 3),
    ] {
        grid.extend((1..=max).map(|count| AttackSpec::new(kind, count, 0)));
    }
    grid
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::ConfigInvalid(
                "trials must be at least 1".into(),
            ));
        }
        if self.shape.is_empty() {
            return Err(HarnessError::ConfigInvalid("latent shape is empty".into()));
        }
        self.policy()?;
        Ok(())
    }

    /// Policy at `capacity` bits with the configured `tau`.
    pub fn policy(&self) -> Result<DetectionPolicy, HarnessError> {
        Ok(DetectionPolicy::new(
            self.capacity,
            self.shape.len(),
            self.tau,
            self.alpha0,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_uses_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"trials": 10, "backend": "linear:3", "srm": {"w_max": 2, "directions": "bidirectional", "early_stop": false},
                "attacks": [{"kind": "replace", "count": 2, "seed": 0}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.backend, BackendSpec::Linear(3));
        assert_eq!(cfg.srm.w_max, 2);
        assert_eq!(cfg.steps, 50);
        assert_eq!(cfg.guidance, 7.5);
        assert_eq!(cfg.attacks.len(), 1);
        assert!(ExperimentConfig::from_json(r#"{"trails": 3}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.attacks.len(), 16);
        cfg.trials = 0;
        assert!(matches!(
            cfg.validate(),
            Err(HarnessError::ConfigInvalid(_))
        ));
        cfg.trials = 1;
        cfg.capacity = 25;
        assert!(cfg.validate().is_err());
    }
}
