pub mod attacks;
pub mod circuit;
pub mod codec;
pub mod diffusion;
pub mod harness;
pub mod srm;
pub mod watermark;
