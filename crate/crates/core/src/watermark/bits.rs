use super::WatermarkError;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Non-empty ordered bit string. Serializes as a string of `0`/`1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitSequence {
    bits: Vec<bool>,
}

impl BitSequence {
    pub fn new(bits: Vec<bool>) -> Result<Self, WatermarkError> {
        if bits.is_empty() {
            return Err(WatermarkError::EmptySequence);
        }
        Ok(BitSequence { bits })
    }

    /// Uniform random bits.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Result<Self, WatermarkError> {
        BitSequence::new((0..len).map(|_| rng.random()).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Number of positions where `self` and `other` agree.
    pub fn matches(&self, other: &BitSequence) -> Result<usize, WatermarkError> {
        if self.len() != other.len() {
            return Err(WatermarkError::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a == b)
            .count())
    }

    pub fn xor(&self, other: &BitSequence) -> Result<BitSequence, WatermarkError> {
        if self.len() != other.len() {
            return Err(WatermarkError::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(BitSequence {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitSequence {
    type Err = WatermarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(WatermarkError::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        BitSequence::new(bits)
    }
}

impl TryFrom<String> for BitSequence {
    type Error = WatermarkError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BitSequence> for String {
    fn from(b: BitSequence) -> String {
        b.to_string()
    }
}

/// Fraction of equal positions.
pub fn similarity(a: &BitSequence, b: &BitSequence) -> Result<f64, WatermarkError> {
    Ok(a.matches(b)? as f64 / a.len() as f64)
}
