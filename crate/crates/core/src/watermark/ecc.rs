use super::{keystream, BitSequence, WatermarkError, WatermarkKey};

/// Repetition code XORed with the key's keystream, with the keystream cached
/// so repeated decodes (one per SRM candidate) skip the cipher.
#[derive(Debug, Clone)]
pub struct EccCode {
    k: usize,
    n: usize,
    stream: Vec<bool>,
}

impl EccCode {
    pub fn new(key: &WatermarkKey, k: usize, n: usize) -> Result<Self, WatermarkError> {
        if k == 0 || n == 0 || !n.is_multiple_of(k) {
            return Err(WatermarkError::IndivisibleCapacity { k, n });
        }
        Ok(EccCode {
            k,
            n,
            stream: keystream(key, n)?.into_bits(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Repetition factor `v = n / k`.
    pub fn v(&self) -> usize {
        self.n / self.k
    }

    pub fn encode(&self, m: &BitSequence) -> Result<BitSequence, WatermarkError> {
        if m.len() != self.k {
            return Err(WatermarkError::LengthMismatch {
                expected: self.k,
                found: m.len(),
            });
        }
        let v = self.v();
        let bits = (0..self.n).map(|i| m.get(i / v) ^ self.stream[i]).collect();
        BitSequence::new(bits)
    }

    pub fn decode(&self, s: &BitSequence) -> Result<BitSequence, WatermarkError> {
        if s.len() != self.n {
            return Err(WatermarkError::LengthMismatch {
                expected: self.n,
                found: s.len(),
            });
        }
        Ok(self.decode_with(|i| s.get(i)))
    }

    /// Decodes straight from latent values, reading bit `i` as `z[i] ≥ 0`.
    pub fn decode_signs(&self, z: &[f64]) -> Result<BitSequence, WatermarkError> {
        if z.len() != self.n {
            return Err(WatermarkError::LengthMismatch {
                expected: self.n,
                found: z.len(),
            });
        }
        Ok(self.decode_with(|i| z[i] >= 0.0))
    }

    fn decode_with(&self, bit: impl Fn(usize) -> bool) -> BitSequence {
        let v = self.v();
        let bits = (0..self.k)
            .map(|j| {
                let ones = (j * v..(j + 1) * v)
                    .filter(|&i| bit(i) ^ self.stream[i])
                    .count();
                2 * ones > v
            })
            .collect();
        BitSequence::new(bits).expect("k >= 1")
    }
}

/// Repeats each message bit `n / k` times and XORs the keystream.
pub fn ecc_encode(
    m: &BitSequence,
    key: &WatermarkKey,
    n: usize,
) -> Result<BitSequence, WatermarkError> {
    EccCode::new(key, m.len(), n)?.encode(m)
}

/// XORs the keystream, then takes a majority vote per block. Ties give 0.
pub fn ecc_decode(
    s: &BitSequence,
    key: &WatermarkKey,
    k: usize,
) -> Result<BitSequence, WatermarkError> {
    EccCode::new(key, k, s.len())?.decode(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code_with_stream(k: usize, stream: &str) -> EccCode {
        EccCode {
            k,
            n: stream.len(),
            stream: stream.chars().map(|c| c == '1').collect(),
        }
    }

    #[test]
    fn repetition_and_xor_examples() {
        let m: BitSequence = "10".parse().unwrap();
        assert_eq!(
            code_with_stream(2, "000000")
                .encode(&m)
                .unwrap()
                .to_string(),
            "111000"
        );
        assert_eq!(
            code_with_stream(2, "101010")
                .encode(&m)
                .unwrap()
                .to_string(),
            "010010"
        );
    }

    #[test]
    fn tie_resolves_to_zero() {
        let code = code_with_stream(1, "0000");
        assert_eq!(
            code.decode(&"1100".parse().unwrap()).unwrap().to_string(),
            "0"
        );
        assert_eq!(
            code.decode(&"1110".parse().unwrap()).unwrap().to_string(),
            "1"
        );
    }

    #[test]
    fn default_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let key = WatermarkKey::generate(&mut rng, 24).unwrap();
        let code = EccCode::new(&key, 24, 1536).unwrap();
        assert_eq!(code.v(), 64);
        assert_eq!(code.encode(&key.message).unwrap().len(), 1536);
        assert!(matches!(
            EccCode::new(&key, 24, 1000),
            Err(WatermarkError::IndivisibleCapacity { k: 24, n: 1000 })
        ));
    }

    #[test]
    fn decode_signs_matches_decode() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let key = WatermarkKey::generate(&mut rng, 16).unwrap();
        let code = EccCode::new(&key, 16, 256).unwrap();
        let z: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bits = BitSequence::new(z.iter().map(|&x| x >= 0.0).collect()).unwrap();
        assert_eq!(code.decode_signs(&z).unwrap(), code.decode(&bits).unwrap());
    }
}
