//! Thresholds two ways: the exact binomial false-positive rate of the
//! similarity test, and a Neyman-Pearson threshold from a Gaussian fit to
//! unwatermarked correct-bit counts.

use qtag::harness::{calibrate_from_fit, run_calibration, ExperimentConfig};
use qtag::watermark::{fpr_binomial, fpr_binomial_beta, DetectionPolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(" k  tau_bits  P(X > tau_bits)   beta route");
    for k in [12, 16, 24, 32, 48] {
        let policy = DetectionPolicy::for_capacity(k, 1536, 1e-3)?;
        let t = policy.tau_bits();
        println!(
            "{k:>2}  {t:>8}  {:.6e}     {:.6e}",
            fpr_binomial(t, k),
            fpr_binomial_beta(t, k)
        );
    }

    let r = calibrate_from_fit(9.0, 2.43, 1e-3, 24)?;
    println!(
        "\nfrom a given fit (mu0 = 9.00, sigma0 = 2.43): th = {:.3}",
        r.result.th
    );

    let cfg = ExperimentConfig::default();
    let r = run_calibration(500, 2000, 1e-3, &cfg)?;
    println!(
        "sampled: mu0 = {:.3} sigma0 = {:.3}  mu1 = {:.3} sigma1 = {:.3}  th = {:.3}",
        r.result.mu0, r.result.sigma0, r.result.mu1, r.result.sigma1, r.result.th
    );
    println!(
        "tau_bits = {}: P(X > tau_bits) = {:.3e}, P(X >= tau_bits) = {:.3e}",
        r.tau_bits, r.fpr_strict, r.fpr_inclusive
    );
    println!("\ncorrect bits   watermarked  unwatermarked");
    for h in r
        .histogram
        .iter()
        .filter(|h| h.watermarked + h.unwatermarked > 0)
    {
        println!(
            "{:>12}   {:>11}  {:>13}",
            h.correct_bits, h.watermarked, h.unwatermarked
        );
    }
    Ok(())
}
