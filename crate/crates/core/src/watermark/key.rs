use super::{BitSequence, WatermarkError};
use chacha20::cipher::{KeyIvInit, StreamCipher, StreamCipherSeek};
use chacha20::ChaCha20;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Everything needed to embed and later verify one watermark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatermarkKey {
    pub message: BitSequence,
    pub cipher_key: [u8; 32],
    pub nonce: [u8; 12],
    pub gauss_seed: u64,
}

#[derive(Serialize, Deserialize)]
struct KeyFile {
    cipher_key: String,
    nonce: String,
    gauss_seed: u64,
    message: String,
}

impl WatermarkKey {
    /// Fresh key with a uniform random `k`-bit message.
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Result<Self, WatermarkError> {
        let message = BitSequence::random(rng, k)?;
        let mut cipher_key = [0u8; 32];
        let mut nonce = [0u8; 12];
        rng.fill(&mut cipher_key);
        rng.fill(&mut nonce);
        Ok(WatermarkKey {
            message,
            cipher_key,
            nonce,
            gauss_seed: rng.random(),
        })
    }

    /// Same keystream and Gaussian seed, different message.
    pub fn with_message(&self, message: BitSequence) -> Self {
        WatermarkKey {
            message,
            ..self.clone()
        }
    }

    pub fn k(&self) -> usize {
        self.message.len()
    }

    pub fn to_json(&self) -> String {
        let file = KeyFile {
            cipher_key: hex::encode(self.cipher_key),
            nonce: hex::encode(self.nonce),
            gauss_seed: self.gauss_seed,
            message: self.message.to_string(),
        };
        serde_json::to_string_pretty(&file).expect("key file always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, WatermarkError> {
        let file: KeyFile = serde_json::from_str(text)?;
        let decode = |field: &str, value: &str, len: usize| -> Result<Vec<u8>, WatermarkError> {
            let bytes = hex::decode(value)
                .map_err(|e| WatermarkError::InvalidKey(format!("{field}: {e}")))?;
            if bytes.len() != len {
                return Err(WatermarkError::InvalidKey(format!(
                    "{field} must be {len} bytes, got {}",
                    bytes.len()
                )));
            }
            Ok(bytes)
        };
        let cipher_key = decode("cipher_key", &file.cipher_key, 32)?;
        let nonce = decode("nonce", &file.nonce, 12)?;
        Ok(WatermarkKey {
            message: file.message.parse()?,
            cipher_key: cipher_key.try_into().expect("length checked"),
            nonce: nonce.try_into().expect("length checked"),
            gauss_seed: file.gauss_seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), WatermarkError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, WatermarkError> {
        WatermarkKey::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Raw ChaCha20 keystream bytes starting at block `counter`.
pub fn keystream_bytes(key: &[u8; 32], nonce: &[u8; 12], counter: u32, len: usize) -> Vec<u8> {
    let mut cipher = ChaCha20::new(key.into(), nonce.into());
    cipher.seek(counter as u64 * 64);
    let mut buf = vec![0u8; len];
    cipher.apply_keystream(&mut buf);
    buf
}

/// First `length` keystream bits (block counter 0), each byte expanded most
/// significant bit first.
pub fn keystream(key: &WatermarkKey, length: usize) -> Result<BitSequence, WatermarkError> {
    let bytes = keystream_bytes(&key.cipher_key, &key.nonce, 0, length.div_ceil(8));
    let bits = bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| b >> i & 1 == 1))
        .take(length)
        .collect();
    BitSequence::new(bits)
}
