use super::bench::derive_seed;
use super::{ExperimentConfig, HarnessError, Pipeline};
use crate::srm::SrmConfig;
use crate::watermark::{fpr_binomial, np_calibrate, CalibrationResult, GaussianFit, WatermarkKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MIN_CALIBRATION_SAMPLES: usize = 100;

/// Counts of each correct-bit value `0..=k` in both populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub correct_bits: usize,
    pub watermarked: usize,
    pub unwatermarked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub k: usize,
    pub alpha0: f64,
    pub result: CalibrationResult,
    /// Smallest integer count `≥ th`.
    pub tau_bits: usize,
    /// `P(X > tau_bits)` under Binomial(k, 1/2).
    pub fpr_strict: f64,
    /// `P(X ≥ tau_bits)` under Binomial(k, 1/2).
    pub fpr_inclusive: f64,
    pub histogram: Vec<HistogramRow>,
}

impl CalibrationReport {
    fn finish(
        k: usize,
        alpha0: f64,
        result: CalibrationResult,
        histogram: Vec<HistogramRow>,
    ) -> Self {
        let tau_bits = (result.th.ceil().max(0.0) as usize).min(k);
        CalibrationReport {
            k,
            alpha0,
            result,
            tau_bits,
            fpr_strict: fpr_binomial(tau_bits, k),
            fpr_inclusive: if tau_bits == 0 {
                1.0
            } else {
                fpr_binomial(tau_bits - 1, k)
            },
            histogram,
        }
    }
}

/// Threshold straight from given null-fit parameters, with no sampling.
pub fn calibrate_from_fit(
    mu0: f64,
    sigma0: f64,
    alpha0: f64,
    k: usize,
) -> Result<CalibrationReport, HarnessError> {
    let result = np_calibrate(mu0, sigma0, alpha0)?;
    Ok(CalibrationReport::finish(k, alpha0, result, Vec::new()))
}

/// Fits Gaussians to the correct-bit counts of `samples_w` watermarked and
/// `samples_u` unwatermarked circuits (no attack, standard extraction) and
/// sets the threshold from the unwatermarked fit.
pub fn run_calibration(
    samples_w: usize,
    samples_u: usize,
    alpha0: f64,
    cfg: &ExperimentConfig,
) -> Result<CalibrationReport, HarnessError> {
    if samples_w < MIN_CALIBRATION_SAMPLES || samples_u < MIN_CALIBRATION_SAMPLES {
        return Err(HarnessError::ConfigInvalid(format!(
            "calibration needs at least {MIN_CALIBRATION_SAMPLES} samples per population"
        )));
    }
    cfg.validate()?;
    let pipeline = Pipeline::new(cfg.backend, cfg.steps, cfg.guidance, cfg.shape)?;
    let policy = cfg.policy()?;
    let k = policy.k;

    let count = |watermarked: bool, i: u64| -> Result<usize, HarnessError> {
        let seed = derive_seed(cfg.master_seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let key = WatermarkKey::generate(&mut rng, k)?;
        let circuit = if watermarked {
            pipeline.embed(&key)?.circuit
        } else {
            pipeline.generate_unwatermarked(derive_seed(seed, 1))?
        };
        let report = pipeline
            .detector(&key, policy, SrmConfig::disabled())?
            .detect(&circuit)?;
        Ok((report.standard_similarity * k as f64).round() as usize)
    };
    let w: Vec<usize> = (0..samples_w as u64)
        .into_par_iter()
        .map(|i| count(true, i))
        .collect::<Result<_, _>>()?;
    // Disjoint index range so the two populations never share a key.
    let u: Vec<usize> = (0..samples_u as u64)
        .into_par_iter()
        .map(|i| count(false, samples_w as u64 + i))
        .collect::<Result<_, _>>()?;

    let fit = |xs: &[usize]| {
        let xs: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        GaussianFit::from_samples(&xs).expect("at least two samples")
    };
    let (f1, f0) = (fit(&w), fit(&u));
    let mut result = np_calibrate(f0.mean, f0.std_dev, alpha0)?;
    result.mu1 = f1.mean;
    result.sigma1 = f1.std_dev;

    let mut histogram: Vec<HistogramRow> = (0..=k)
        .map(|correct_bits| HistogramRow {
            correct_bits,
            watermarked: 0,
            unwatermarked: 0,
        })
        .collect();
    for &x in &w {
        histogram[x].watermarked += 1;
    }
    for &x in &u {
        histogram[x].unwatermarked += 1;
    }
    Ok(CalibrationReport::finish(k, alpha0, result, histogram))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bypass_matches_reference_threshold() {
        let r = calibrate_from_fit(9.0, 2.43, 1e-3, 24).unwrap();
        assert!((r.result.th - 16.51).abs() < 0.05);
        assert_eq!(r.tau_bits, 17);
        assert_eq!(r.fpr_inclusive, fpr_binomial(16, 24));
        assert_eq!(r.fpr_strict, fpr_binomial(17, 24));
    }

    #[test]
    fn too_few_samples() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(
            run_calibration(99, 500, 1e-3, &cfg),
            Err(HarnessError::ConfigInvalid(_))
        ));
    }

    #[test]
    fn zero_noise_populations() {
        let cfg = ExperimentConfig::default();
        let r = run_calibration(200, 400, 1e-3, &cfg).unwrap();
        assert!(r.result.mu1 > 23.5 && r.result.mu1 <= 24.0);
        assert!(r.result.sigma1 < 0.6);
        // Binomial(24, 1/2): mean 12, sd √6; three standard errors.
        let se = 6f64.sqrt() / 400f64.sqrt();
        assert!(
            (r.result.mu0 - 12.0).abs() < 3.0 * se,
            "mu0 = {}",
            r.result.mu0
        );
        assert_eq!(r.histogram.len(), 25);
        assert!(r.histogram[..20].iter().all(|h| h.watermarked == 0));
        assert_eq!(
            r.histogram.iter().map(|h| h.watermarked).sum::<usize>(),
            200
        );
        assert_eq!(
            r.histogram.iter().map(|h| h.unwatermarked).sum::<usize>(),
            400
        );
    }
}
