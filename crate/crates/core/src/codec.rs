//! Circuit ⇄ latent mapping through a sign-pattern codebook, and the binary
//! latent file format.
//!
//! Each grid cell `(qubit, column)` owns `f_c = 4` latent channels. Token `t`
//! is written as the codeword whose channel `c` is `+1` when bit `c` of `t` is
//! set and `−1` otherwise, so decoding a cell is a per-channel sign test
//! (`0 ↦ +`). Flat index order is channel fastest, then qubit row, then
//! column: `index = col·(f_h·f_c) + row·f_c + ch`.

use crate::circuit::{repair_column, Circuit, GateKind};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

pub const DEFAULT_CHANNELS: usize = 4;
pub const DEFAULT_ROWS: usize = 8;
pub const DEFAULT_COLS: usize = 48;

/// Codeword amplitude.
pub const AMPLITUDE: f64 = 1.0;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("latent holds a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("not a latent file (bad magic)")]
    BadMagic,
    #[error("unsupported latent file version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported latent rank {0}")]
    UnsupportedRank(u32),
    #[error("latent file truncated or oversized")]
    Length,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `(f_c, f_h, f_w)`: channels, qubit rows, time columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatentShape {
    pub channels: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Default for LatentShape {
    fn default() -> Self {
        LatentShape {
            channels: DEFAULT_CHANNELS,
            rows: DEFAULT_ROWS,
            cols: DEFAULT_COLS,
        }
    }
}

impl LatentShape {
    pub fn new(channels: usize, rows: usize, cols: usize) -> Self {
        LatentShape {
            channels,
            rows,
            cols,
        }
    }

    /// Total element count `n`.
    pub fn len(&self) -> usize {
        self.channels * self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Elements per column.
    pub fn column_len(&self) -> usize {
        self.channels * self.rows
    }

    pub fn index(&self, ch: usize, row: usize, col: usize) -> usize {
        debug_assert!(ch < self.channels && row < self.rows && col < self.cols);
        col * self.column_len() + row * self.channels + ch
    }

    /// Inverse of [`LatentShape::index`].
    pub fn unflatten(&self, index: usize) -> (usize, usize, usize) {
        let col = index / self.column_len();
        let rem = index % self.column_len();
        (rem % self.channels, rem / self.channels, col)
    }
}

/// Real tensor of shape `(f_c, f_h, f_w)` stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTensor {
    shape: LatentShape,
    data: Vec<f64>,
}

impl LatentTensor {
    pub fn zeros(shape: LatentShape) -> Self {
        LatentTensor {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn from_vec(shape: LatentShape, data: Vec<f64>) -> Result<Self, CodecError> {
        if data.len() != shape.len() {
            return Err(CodecError::ShapeMismatch(format!(
                "{} values for shape {:?}",
                data.len(),
                shape
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(CodecError::NonFinite(i));
        }
        Ok(LatentTensor { shape, data })
    }

    pub fn shape(&self) -> LatentShape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, ch: usize, row: usize, col: usize) -> f64 {
        self.data[self.shape.index(ch, row, col)]
    }

    /// The contiguous slice holding column `col`.
    pub fn column(&self, col: usize) -> &[f64] {
        let w = self.shape.column_len();
        &self.data[col * w..(col + 1) * w]
    }

    /// Fraction of positions where `self` and `other` have the same sign
    /// under the `0 ↦ +` convention.
    pub fn sign_agreement(&self, other: &LatentTensor) -> f64 {
        assert_eq!(self.shape, other.shape, "sign_agreement needs equal shapes");
        let same = self
            .data
            .iter()
            .zip(&other.data)
            .filter(|(a, b)| (**a >= 0.0) == (**b >= 0.0))
            .count();
        same as f64 / self.data.len() as f64
    }
}

/// The 16 sign-pattern codewords.
#[derive(Debug, Clone, Copy, Default)]
pub struct Codebook;

impl Codebook {
    pub fn codeword(token: GateKind) -> [f64; 4] {
        let id = token.token_id();
        std::array::from_fn(|c| {
            if id >> c & 1 == 1 {
                AMPLITUDE
            } else {
                -AMPLITUDE
            }
        })
    }

    /// Nearest codeword in Euclidean distance, which for this codebook is the
    /// per-channel sign pattern.
    pub fn nearest(cell: &[f64]) -> GateKind {
        let id = cell.iter().enumerate().fold(
            0u8,
            |acc, (c, &v)| if v >= 0.0 { acc | 1 << c } else { acc },
        );
        GateKind::from_token_id(id).expect("four channels give a token below 16")
    }
}

/// Output of [`encode_circuit`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedCircuit {
    pub latent: LatentTensor,
    /// Set when the circuit had more than `f_w` columns and the excess was
    /// dropped.
    pub truncated: bool,
}

fn check_channels(shape: LatentShape) -> Result<(), CodecError> {
    if shape.channels != DEFAULT_CHANNELS {
        return Err(CodecError::ShapeMismatch(format!(
            "the codebook needs {DEFAULT_CHANNELS} channels, got {}",
            shape.channels
        )));
    }
    Ok(())
}

/// Writes each cell's codeword; columns past the circuit are identity.
pub fn encode_circuit(c: &Circuit, shape: LatentShape) -> Result<EncodedCircuit, CodecError> {
    check_channels(shape)?;
    if c.num_qubits() != shape.rows {
        return Err(CodecError::ShapeMismatch(format!(
            "{}-qubit circuit for {} latent rows",
            c.num_qubits(),
            shape.rows
        )));
    }
    let mut data = Vec::with_capacity(shape.len());
    let ident = Codebook::codeword(GateKind::Ident);
    for col in 0..shape.cols {
        for row in 0..shape.rows {
            let token = c
                .columns()
                .get(col)
                .map_or(GateKind::Ident, |column| column[row]);
            let word = if token.is_ident() {
                ident
            } else {
                Codebook::codeword(token)
            };
            data.extend_from_slice(&word);
        }
    }
    Ok(EncodedCircuit {
        latent: LatentTensor { shape, data },
        truncated: c.num_columns() > shape.cols,
    })
}

/// Quantizes every cell to its nearest codeword and clears incomplete
/// partner groups. Always yields `f_w` columns.
pub fn decode_latent(z: &LatentTensor) -> Result<Circuit, CodecError> {
    let shape = z.shape();
    check_channels(shape)?;
    let columns = (0..shape.cols)
        .map(|col| {
            let mut column: Vec<GateKind> = z
                .column(col)
                .chunks_exact(shape.channels)
                .map(Codebook::nearest)
                .collect();
            repair_column(&mut column);
            column
        })
        .collect();
    Circuit::from_columns(shape.rows, columns).map_err(|e| CodecError::ShapeMismatch(e.to_string()))
}

const MAGIC: &[u8; 4] = b"QTAG";
const VERSION: u32 = 1;

/// Little-endian: `"QTAG"`, version, rank 3, three dims, then binary32
/// values in flat order.
pub fn write_latent<W: Write>(mut w: W, z: &LatentTensor) -> Result<(), CodecError> {
    let s = z.shape();
    w.write_all(MAGIC)?;
    for v in [VERSION, 3, s.channels as u32, s.rows as u32, s.cols as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for &v in z.data() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_latent<R: Read>(mut r: R) -> Result<LatentTensor, CodecError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| CodecError::BadMagic)?;
    if &magic != MAGIC {
        return Err(CodecError::BadMagic);
    }
    let mut word = || -> Result<u32, CodecError> {
        let mut b = [0u8; 4];
        r.read_exact(&mut b).map_err(|_| CodecError::Length)?;
        Ok(u32::from_le_bytes(b))
    };
    let version = word()?;
    if version != VERSION {
        return Err(CodecError::UnsupportedVersion(version));
    }
    let rank = word()?;
    if rank != 3 {
        return Err(CodecError::UnsupportedRank(rank));
    }
    let shape = LatentShape::new(word()? as usize, word()? as usize, word()? as usize);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != shape.len() * 4 {
        return Err(CodecError::Length);
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    LatentTensor::from_vec(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_qasm;
    use GateKind::*;

    fn idle(qubits: usize, cols: usize) -> Circuit {
        Circuit::from_columns(qubits, vec![vec![Ident; qubits]; cols]).unwrap()
    }

    #[test]
    fn identity_circuit_is_all_minus_one() {
        let enc = encode_circuit(&idle(8, 48), LatentShape::default()).unwrap();
        assert!(enc.latent.data().iter().all(|&v| v == -1.0));
        assert!(!enc.truncated);
        assert_eq!(decode_latent(&enc.latent).unwrap(), idle(8, 48));
    }

    #[test]
    fn hadamard_codeword() {
        let c = parse_qasm("qreg q[8]; h q[0];").unwrap();
        let z = encode_circuit(&c, LatentShape::default()).unwrap().latent;
        let cell: Vec<f64> = (0..4).map(|ch| z.get(ch, 0, 0)).collect();
        assert_eq!(cell, vec![1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn codebook_is_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for g in GateKind::ALL {
            let w = Codebook::codeword(g);
            assert_eq!(Codebook::nearest(&w), g);
            assert!(seen.insert(w.map(|v| v > 0.0)));
        }
        assert_eq!(Codebook::nearest(&[0.0, -0.1, -3.0, -1.0]), H);
    }

    #[test]
    fn lone_control_is_repaired() {
        let shape = LatentShape::new(4, 2, 1);
        let mut data = Codebook::codeword(CxControl).to_vec();
        data.extend(Codebook::codeword(X));
        let c = decode_latent(&LatentTensor::from_vec(shape, data).unwrap()).unwrap();
        assert_eq!(c.columns(), &[vec![Ident, X]]);
    }

    #[test]
    fn shape_errors_and_truncation() {
        assert!(matches!(
            encode_circuit(&idle(3, 1), LatentShape::default()),
            Err(CodecError::ShapeMismatch(_))
        ));
        let wide = parse_qasm("qreg q[2]; h q[0]; h q[0]; h q[0];").unwrap();
        let enc = encode_circuit(&wide, LatentShape::new(4, 2, 2)).unwrap();
        assert!(enc.truncated);
        assert_eq!(decode_latent(&enc.latent).unwrap().num_columns(), 2);
    }

    #[test]
    fn flatten_index_roundtrip() {
        let s = LatentShape::default();
        for i in 0..s.len() {
            let (ch, row, col) = s.unflatten(i);
            assert_eq!(s.index(ch, row, col), i);
        }
        assert_eq!(s.index(1, 2, 3), 3 * 32 + 2 * 4 + 1);
    }

    #[test]
    fn latent_file_roundtrip_and_errors() {
        let shape = LatentShape::new(4, 2, 3);
        let z =
            LatentTensor::from_vec(shape, (0..24).map(|i| i as f64 * 0.5 - 3.0).collect()).unwrap();
        let mut buf = Vec::new();
        write_latent(&mut buf, &z).unwrap();
        assert_eq!(&buf[..4], b"QTAG");
        assert_eq!(buf.len(), 4 + 5 * 4 + 24 * 4);
        assert_eq!(u32::from_le_bytes(buf[16..20].try_into().unwrap()), 2);
        assert_eq!(read_latent(&buf[..]).unwrap(), z);

        assert!(matches!(
            read_latent(&b"NOPE"[..]),
            Err(CodecError::BadMagic)
        ));
        let mut bad = buf.clone();
        bad[4] = 2;
        assert!(matches!(
            read_latent(&bad[..]),
            Err(CodecError::UnsupportedVersion(2))
        ));
        assert!(matches!(
            read_latent(&buf[..buf.len() - 1]),
            Err(CodecError::Length)
        ));
    }
}
