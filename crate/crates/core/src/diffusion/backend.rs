use super::DiffusionError;
use crate::codec::{LatentShape, LatentTensor};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Noise predictor `ε̂(z, t, guidance)` driving the sampler.
pub trait DenoiserBackend: Send + Sync {
    fn name(&self) -> String;

    /// Writes `ε̂(z, step, guidance)` into `out`, which has `z`'s length.
    fn predict_noise_into(
        &self,
        z: &LatentTensor,
        step: usize,
        guidance: f64,
        out: &mut [f64],
    ) -> Result<(), DiffusionError>;

    fn predict_noise(
        &self,
        z: &LatentTensor,
        step: usize,
        guidance: f64,
    ) -> Result<LatentTensor, DiffusionError> {
        let mut out = vec![0.0; z.shape().len()];
        self.predict_noise_into(z, step, guidance, &mut out)?;
        LatentTensor::from_vec(z.shape(), out).map_err(|_| DiffusionError::NonFiniteValue)
    }

    /// `true` when `ε̂` is identically zero, letting the sampler skip it.
    fn is_zero(&self) -> bool {
        false
    }
}

/// Predicts zero noise everywhere, so sampling is a pure rescaling.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl DenoiserBackend for ZeroNoise {
    fn name(&self) -> String {
        "zero".into()
    }

    fn predict_noise_into(
        &self,
        _z: &LatentTensor,
        _step: usize,
        _guidance: f64,
        out: &mut [f64],
    ) -> Result<(), DiffusionError> {
        out.fill(0.0);
        Ok(())
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// `ε̂ = γ·R·z` for a fixed seeded rotation `R`.
///
/// `R = R_w ⊗ R_h ⊗ R_c` acts on the column, row and channel axes with
/// independent Haar-distributed rotations, so applying it costs
/// `O(n·(f_c + f_h + f_w))` rather than `O(n²)`.
#[derive(Debug, Clone)]
pub struct LinearOrthogonal {
    seed: u64,
    gamma: f64,
    shape: LatentShape,
    r_c: DMatrix<f64>,
    r_h: DMatrix<f64>,
    r_w: DMatrix<f64>,
}

pub const DEFAULT_GAMMA: f64 = 0.1;

impl LinearOrthogonal {
    pub fn new(seed: u64, shape: LatentShape) -> Self {
        LinearOrthogonal::with_gamma(seed, shape, DEFAULT_GAMMA)
    }

    pub fn with_gamma(seed: u64, shape: LatentShape, gamma: f64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let r_c = random_rotation(&mut rng, shape.channels);
        let r_h = random_rotation(&mut rng, shape.rows);
        let r_w = random_rotation(&mut rng, shape.cols);
        LinearOrthogonal {
            seed,
            gamma,
            shape,
            r_c,
            r_h,
            r_w,
        }
    }

    pub fn shape(&self) -> LatentShape {
        self.shape
    }

    /// `out = R·z` on flat data.
    pub fn rotate(&self, z: &[f64], out: &mut [f64]) {
        let LatentShape {
            channels: fc,
            rows: fh,
            cols: fw,
        } = self.shape;
        let col_len = fc * fh;
        let mut tmp = vec![0.0; z.len()];
        // Channel axis.
        for cell in 0..fw * fh {
            let base = cell * fc;
            for i in 0..fc {
                let mut acc = 0.0;
                for j in 0..fc {
                    acc += self.r_c[(i, j)] * z[base + j];
                }
                tmp[base + i] = acc;
            }
        }
        // Row axis.
        for col in 0..fw {
            let base = col * col_len;
            for i in 0..fh {
                let dst = &mut out[base + i * fc..base + (i + 1) * fc];
                dst.fill(0.0);
                for j in 0..fh {
                    let r = self.r_h[(i, j)];
                    let src = &tmp[base + j * fc..base + (j + 1) * fc];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += r * s;
                    }
                }
            }
        }
        // Column axis.
        for i in 0..fw {
            let dst = &mut tmp[i * col_len..(i + 1) * col_len];
            dst.fill(0.0);
            for j in 0..fw {
                let r = self.r_w[(i, j)];
                let src = &out[j * col_len..(j + 1) * col_len];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += r * s;
                }
            }
        }
        out.copy_from_slice(&tmp);
    }
}

impl DenoiserBackend for LinearOrthogonal {
    fn name(&self) -> String {
        format!("linear:{}", self.seed)
    }

    fn predict_noise_into(
        &self,
        z: &LatentTensor,
        _step: usize,
        _guidance: f64,
        out: &mut [f64],
    ) -> Result<(), DiffusionError> {
        if z.shape() != self.shape {
            return Err(DiffusionError::ShapeMismatch {
                expected: self.shape,
                found: z.shape(),
            });
        }
        self.rotate(z.data(), out);
        for v in out.iter_mut() {
            *v *= self.gamma;
        }
        Ok(())
    }
}

/// Haar-distributed element of SO(d): QR of a Gaussian matrix with the
/// diagonal of R made positive, then one column negated if needed.
fn random_rotation(rng: &mut ChaCha20Rng, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Backend selector as written in configs: `"zero"` or `"linear:<seed>"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BackendSpec {
    Zero,
    Linear(u64),
}

impl BackendSpec {
    pub fn build(&self, shape: LatentShape) -> Arc<dyn DenoiserBackend> {
        match *self {
            BackendSpec::Zero => Arc::new(ZeroNoise),
            BackendSpec::Linear(seed) => Arc::new(LinearOrthogonal::new(seed, shape)),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Zero => f.write_str("zero"),
            BackendSpec::Linear(seed) => write!(f, "linear:{seed}"),
        }
    }
}

impl FromStr for BackendSpec {
    type Err = DiffusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "zero" => Ok(BackendSpec::Zero),
            Some(("linear", seed)) => seed
                .parse()
                .map(BackendSpec::Linear)
                .map_err(|_| DiffusionError::UnknownBackend(s.to_string())),
            _ => Err(DiffusionError::UnknownBackend(s.to_string())),
        }
    }
}

impl TryFrom<String> for BackendSpec {
    type Error = DiffusionError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BackendSpec> for String {
    fn from(spec: BackendSpec) -> String {
        spec.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape() -> LatentShape {
        LatentShape::new(4, 3, 5)
    }

    #[test]
    fn rotation_factors_are_special_orthogonal() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for d in [1, 2, 4, 8, 48] {
            let q = random_rotation(&mut rng, d);
            let err = (q.transpose() * &q - DMatrix::identity(d, d)).amax();
            assert!(err < 1e-12, "d={d}: {err}");
            assert!((q.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rotate_matches_dense_kronecker() {
        let b = LinearOrthogonal::new(3, shape());
        let dense = b.r_w.kronecker(&b.r_h).kronecker(&b.r_c);
        let n = shape().len();
        let z: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut out = vec![0.0; n];
        b.rotate(&z, &mut out);
        let expected = &dense * nalgebra::DVector::from_vec(z.clone());
        for i in 0..n {
            assert!((out[i] - expected[i]).abs() < 1e-12);
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm(&out) - norm(&z)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_scaled() {
        let z =
            LatentTensor::from_vec(shape(), (0..60).map(|i| i as f64 - 30.0).collect()).unwrap();
        let a = LinearOrthogonal::new(1, shape())
            .predict_noise(&z, 3, 7.5)
            .unwrap();
        let b = LinearOrthogonal::new(1, shape())
            .predict_noise(&z, 40, 0.0)
            .unwrap();
        assert_eq!(a, b);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm(a.data()) - 0.1 * norm(z.data())).abs() < 1e-9);
        assert!(ZeroNoise
            .predict_noise(&z, 1, 1.0)
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn backend_spec_strings() {
        assert_eq!("zero".parse::<BackendSpec>().unwrap(), BackendSpec::Zero);
        assert_eq!(
            "linear:42".parse::<BackendSpec>().unwrap(),
            BackendSpec::Linear(42)
        );
        assert_eq!(BackendSpec::Linear(7).to_string(), "linear:7");
        assert!("linear:x".parse::<BackendSpec>().is_err());
        assert!("genqc".parse::<BackendSpec>().is_err());
        let json = serde_json::to_string(&BackendSpec::Linear(5)).unwrap();
        assert_eq!(json, "\"linear:5\"");
        assert_eq!(
            serde_json::from_str::<BackendSpec>(&json).unwrap(),
            BackendSpec::Linear(5)
        );
    }
}
