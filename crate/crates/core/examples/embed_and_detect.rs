//! Generate a watermarked circuit with the exact reference backend, then
//! verify it with the right key and with an unrelated one.

use qtag::codec::LatentShape;
use qtag::diffusion::BackendSpec;
use qtag::harness::Pipeline;
use qtag::srm::SrmConfig;
use qtag::watermark::{DetectionPolicy, WatermarkKey};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let key = WatermarkKey::generate(&mut rng, 24)?;
    let stranger = WatermarkKey::generate(&mut rng, 24)?;
    println!("message {}", key.message);

    let shape = LatentShape::default();
    let pipeline = Pipeline::new(BackendSpec::Zero, 50, 7.5, shape)?;
    let embedding = pipeline.embed(&key)?;
    println!(
        "circuit: {} gates over {} columns",
        embedding.circuit.gate_count(),
        embedding.circuit.num_columns()
    );

    let policy = DetectionPolicy::default_for(shape.len())?;
    for (name, k) in [("owner", &key), ("stranger", &stranger)] {
        let report = pipeline
            .detector(k, policy, SrmConfig::default())?
            .detect(&embedding.circuit)?;
        println!(
            "{name:>8}: detected={} similarity={:.3} extracted={} candidates={}",
            report.detected,
            report.best_similarity,
            report.extracted_message,
            report.candidates_tried
        );
    }
    Ok(())
}
