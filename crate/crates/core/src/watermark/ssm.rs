use super::{BitSequence, WatermarkError, WatermarkKey};
use crate::codec::{LatentShape, LatentTensor};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// `n` standard-normal draws from a generator seeded by `seed`.
pub fn gaussian_draws(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Folds each draw into the half-line its bit selects: bit 0 keeps negative
/// values, bit 1 keeps non-negative ones, anything else is negated.
pub fn fold_into_partitions(bits: &[bool], draws: &mut [f64]) {
    for (z, &bit) in draws.iter_mut().zip(bits) {
        if (*z >= 0.0) != bit {
            *z = -*z;
        }
    }
}

/// Builds the starting latent whose sign pattern carries `s_en`.
pub fn ssm_sample(
    s_en: &BitSequence,
    key: &WatermarkKey,
    shape: LatentShape,
) -> Result<LatentTensor, WatermarkError> {
    if s_en.len() != shape.len() {
        return Err(WatermarkError::LengthMismatch {
            expected: shape.len(),
            found: s_en.len(),
        });
    }
    let mut draws = gaussian_draws(key.gauss_seed, shape.len());
    fold_into_partitions(s_en.bits(), &mut draws);
    Ok(LatentTensor::from_vec(shape, draws).expect("finite draws of the right length"))
}

/// Bit `i` is 1 iff `z_i ≥ 0`.
pub fn reverse_sample(z: &LatentTensor) -> BitSequence {
    BitSequence::new(z.data().iter().map(|&v| v >= 0.0).collect()).expect("non-empty latent")
}
