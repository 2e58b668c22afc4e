use super::WatermarkError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;
use statrs::statistics::Statistics;

/// Default similarity threshold: 19 of 24 bits.
pub const DEFAULT_TAU: f64 = 0.7916;
pub const DEFAULT_ALPHA0: f64 = 1e-3;
pub const DEFAULT_K: usize = 24;

/// Numerator of the strict upper binomial tail, `Σ_{i>tau_bits} C(k, i)`.
pub fn binomial_tail_count(tau_bits: usize, k: usize) -> u128 {
    assert!(tau_bits <= k && k <= 127, "need tau_bits <= k <= 127");
    let mut c: u128 = 1;
    let mut total = 0;
    for i in 0..=k {
        if i > tau_bits {
            total += c;
        }
        c = c * (k - i) as u128 / (i + 1) as u128;
    }
    total
}

/// False-positive rate of a random `k`-bit message scoring strictly more than
/// `tau_bits` correct bits: `2^{-k} Σ_{i=tau_bits+1}^{k} C(k, i)`.
pub fn fpr_binomial(tau_bits: usize, k: usize) -> f64 {
    binomial_tail_count(tau_bits, k) as f64 / 2f64.powi(k as i32)
}

/// The same tail through the regularized incomplete beta function,
/// `I_{1/2}(tau_bits + 1, k − tau_bits)`.
pub fn fpr_binomial_beta(tau_bits: usize, k: usize) -> f64 {
    assert!(tau_bits <= k, "need tau_bits <= k");
    if tau_bits == k {
        return 0.0;
    }
    beta_reg((tau_bits + 1) as f64, (k - tau_bits) as f64, 0.5)
}

/// Smallest `tau_bits` with `fpr_binomial(tau_bits, k) ≤ alpha0`.
pub fn min_tau_bits(k: usize, alpha0: f64) -> usize {
    (0..=k)
        .find(|&t| fpr_binomial(t, k) <= alpha0)
        .expect("fpr_binomial(k, k) is zero")
}

/// Parameters of the two fitted correct-bit-count distributions and the
/// resulting decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub mu0: f64,
    pub sigma0: f64,
    pub mu1: f64,
    pub sigma1: f64,
    pub th: f64,
}

/// Sample mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub std_dev: f64,
}

impl GaussianFit {
    /// A constant sample yields `std_dev = 0`.
    pub fn from_samples(samples: &[f64]) -> Option<GaussianFit> {
        if samples.len() < 2 {
            return None;
        }
        let mean = samples.mean();
        let std_dev = samples.std_dev();
        Some(GaussianFit {
            mean,
            std_dev: if std_dev.is_finite() { std_dev } else { 0.0 },
        })
    }
}

/// `th = mu0 + sigma0 · Φ^{-1}(1 − alpha0)`.
pub fn np_threshold(mu0: f64, sigma0: f64, alpha0: f64) -> Result<f64, WatermarkError> {
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(WatermarkError::InvalidAlpha(alpha0));
    }
    if !(sigma0 > 0.0 && sigma0.is_finite()) || !mu0.is_finite() {
        return Err(WatermarkError::InvalidFit(format!(
            "mu0 = {mu0}, sigma0 = {sigma0}"
        )));
    }
    // Φ^{-1}(1 − α) = −Φ^{-1}(α) keeps precision for small α.
    let z = -Normal::standard().inverse_cdf(alpha0);
    Ok(mu0 + sigma0 * z)
}

/// Threshold from the null fit only; the alternative's parameters are
/// recorded as NaN.
pub fn np_calibrate(
    mu0: f64,
    sigma0: f64,
    alpha0: f64,
) -> Result<CalibrationResult, WatermarkError> {
    Ok(CalibrationResult {
        mu0,
        sigma0,
        mu1: f64::NAN,
        sigma1: f64::NAN,
        th: np_threshold(mu0, sigma0, alpha0)?,
    })
}

/// The verification contract shared by embedding and detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionPolicy {
    pub k: usize,
    pub v: usize,
    pub n: usize,
    pub tau: f64,
    pub alpha0: f64,
}

impl DetectionPolicy {
    pub fn new(k: usize, n: usize, tau: f64, alpha0: f64) -> Result<Self, WatermarkError> {
        if k == 0 || !n.is_multiple_of(k) {
            return Err(WatermarkError::IndivisibleCapacity { k, n });
        }
        let policy = DetectionPolicy {
            k,
            v: n / k,
            n,
            tau,
            alpha0,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// `k = 24`, `tau = 0.7916`, `alpha0 = 1e-3`.
    pub fn default_for(n: usize) -> Result<Self, WatermarkError> {
        DetectionPolicy::new(DEFAULT_K, n, DEFAULT_TAU, DEFAULT_ALPHA0)
    }

    /// Sets `tau = min_tau_bits(k, alpha0) / k`.
    pub fn for_capacity(k: usize, n: usize, alpha0: f64) -> Result<Self, WatermarkError> {
        if k == 0 {
            return Err(WatermarkError::IndivisibleCapacity { k, n });
        }
        DetectionPolicy::new(k, n, min_tau_bits(k, alpha0) as f64 / k as f64, alpha0)
    }

    pub fn validate(&self) -> Result<(), WatermarkError> {
        if self.k == 0 || self.v * self.k != self.n {
            return Err(WatermarkError::IndivisibleCapacity {
                k: self.k,
                n: self.n,
            });
        }
        let bits = self.tau * self.k as f64;
        if !(bits > self.k as f64 / 2.0 && bits <= self.k as f64) {
            return Err(WatermarkError::InvalidPolicy(format!(
                "tau·k = {bits} must lie in (k/2, k]"
            )));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 < 1.0) {
            return Err(WatermarkError::InvalidAlpha(self.alpha0));
        }
        Ok(())
    }

    /// Accepts iff `similarity ≥ tau`.
    pub fn accepts(&self, similarity: f64) -> bool {
        similarity >= self.tau
    }

    /// Fewest correct bits that are accepted.
    pub fn tau_bits(&self) -> usize {
        (0..=self.k)
            .find(|&b| self.accepts(b as f64 / self.k as f64))
            .unwrap_or(self.k + 1)
    }

    /// Per-candidate false-accept rate of this policy, `P(count ≥ tau_bits)`,
    /// which is `fpr_binomial(tau_bits − 1, k)`.
    pub fn acceptance_fpr(&self) -> f64 {
        match self.tau_bits() {
            0 => 1.0,
            t if t > self.k => 0.0,
            t => fpr_binomial(t - 1, self.k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_examples() {
        assert_eq!(binomial_tail_count(19, 24), 12951);
        assert_eq!(binomial_tail_count(18, 24), 55455);
        assert_eq!(fpr_binomial(24, 24), 0.0);
        assert_eq!(fpr_binomial_beta(24, 24), 0.0);
        assert_eq!(binomial_tail_count(0, 4), 15);
    }

    #[test]
    fn beta_form_agrees() {
        for k in [1, 2, 5, 12, 16, 24, 32, 48] {
            for t in 0..=k {
                let (a, b) = (fpr_binomial(t, k), fpr_binomial_beta(t, k));
                assert!((a - b).abs() < 1e-12, "k={k} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn np_examples() {
        assert!((np_threshold(9.0, 2.43, 1e-3).unwrap() - 16.5093).abs() < 1e-3);
        assert!((np_threshold(3.0, 2.0, 0.5).unwrap() - 3.0).abs() < 1e-12);
        assert!((np_threshold(0.0, 1.0, 0.158655).unwrap() - 1.0).abs() < 1e-5);
        assert!(matches!(
            np_threshold(0.0, 1.0, 1.0),
            Err(WatermarkError::InvalidAlpha(_))
        ));
        assert!(matches!(
            np_threshold(0.0, 1.0, 0.0),
            Err(WatermarkError::InvalidAlpha(_))
        ));
        assert!(np_threshold(0.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn default_policy() {
        let p = DetectionPolicy::default_for(1536).unwrap();
        assert_eq!((p.k, p.v, p.tau_bits()), (24, 64, 19));
        assert!(p.accepts(19.0 / 24.0));
        assert!(!p.accepts(18.0 / 24.0));
        assert_eq!(p.acceptance_fpr(), fpr_binomial(18, 24));
        assert!(DetectionPolicy::new(24, 1536, 0.5, 1e-3).is_err());
        assert!(DetectionPolicy::new(24, 1000, 0.8, 1e-3).is_err());
    }

    #[test]
    fn capacity_policies() {
        assert_eq!(min_tau_bits(24, 1e-3), 19);
        for k in [12, 16, 24, 32, 48] {
            let p = DetectionPolicy::for_capacity(k, 1536, 1e-3).unwrap();
            assert_eq!(p.tau_bits(), min_tau_bits(k, 1e-3));
        }
    }

    #[test]
    fn fit_of_constant_sample() {
        let fit = GaussianFit::from_samples(&[24.0; 10]).unwrap();
        assert_eq!((fit.mean, fit.std_dev), (24.0, 0.0));
        assert!(GaussianFit::from_samples(&[1.0]).is_none());
    }
}
