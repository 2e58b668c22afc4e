use super::HarnessError;
use crate::circuit::Circuit;
use crate::codec::{decode_latent, LatentShape, LatentTensor};
use crate::diffusion::{ddim_sample, BackendSpec, DenoiserBackend, DiffusionSchedule};
use crate::srm::{Detector, SrmConfig};
use crate::watermark::{gaussian_draws, ssm_sample, DetectionPolicy, EccCode, WatermarkKey};
use std::sync::Arc;

/// Generator stand-in: a latent shape, a denoiser, and a schedule.
#[derive(Clone)]
pub struct Pipeline {
    shape: LatentShape,
    backend_spec: BackendSpec,
    backend: Arc<dyn DenoiserBackend>,
    schedule: DiffusionSchedule,
    guidance: f64,
}

/// Intermediate products of one watermarked generation.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub codeword: crate::watermark::BitSequence,
    pub z_t: LatentTensor,
    pub z_0: LatentTensor,
    pub circuit: Circuit,
}

impl Pipeline {
    pub fn new(
        backend: BackendSpec,
        steps: usize,
        guidance: f64,
        shape: LatentShape,
    ) -> Result<Self, HarnessError> {
        Ok(Pipeline {
            shape,
            backend_spec: backend,
            backend: backend.build(shape),
            schedule: DiffusionSchedule::new(steps)?,
            guidance,
        })
    }

    pub fn shape(&self) -> LatentShape {
        self.shape
    }

    pub fn backend_spec(&self) -> BackendSpec {
        self.backend_spec
    }

    pub fn backend(&self) -> &dyn DenoiserBackend {
        self.backend.as_ref()
    }

    pub fn schedule(&self) -> &DiffusionSchedule {
        &self.schedule
    }

    pub fn guidance(&self) -> f64 {
        self.guidance
    }

    /// Encodes the key's message, folds Gaussian draws onto the codeword
    /// signs, samples, and decodes the result to a circuit.
    pub fn embed(&self, key: &WatermarkKey) -> Result<Embedding, HarnessError> {
        let code = EccCode::new(key, key.k(), self.shape.len())?;
        self.embed_with(key, &code)
    }

    pub fn embed_with(
        &self,
        key: &WatermarkKey,
        code: &EccCode,
    ) -> Result<Embedding, HarnessError> {
        let codeword = code.encode(&key.message)?;
        let z_t = ssm_sample(&codeword, key, self.shape)?;
        let z_0 = ddim_sample(&z_t, self.backend(), &self.schedule, self.guidance)?;
        let circuit = decode_latent(&z_0)?;
        Ok(Embedding {
            codeword,
            z_t,
            z_0,
            circuit,
        })
    }

    /// A circuit generated from plain Gaussian noise.
    pub fn generate_unwatermarked(&self, seed: u64) -> Result<Circuit, HarnessError> {
        let z_t = LatentTensor::from_vec(self.shape, gaussian_draws(seed, self.shape.len()))?;
        let z_0 = ddim_sample(&z_t, self.backend(), &self.schedule, self.guidance)?;
        Ok(decode_latent(&z_0)?)
    }

    pub fn detector<'a>(
        &'a self,
        key: &'a WatermarkKey,
        policy: DetectionPolicy,
        srm: SrmConfig,
    ) -> Result<Detector<'a>, HarnessError> {
        Ok(
            Detector::new(key, policy, self.backend(), &self.schedule, srm, self.shape)?
                .with_guidance(self.guidance),
        )
    }
}
