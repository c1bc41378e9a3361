//! Desk-scale laboratory for bias-constrained diffusion noise schedules on
//! 1D PDE emulation: a spectral Kuramoto-Sivashinsky data generator, a small
//! conditional epsilon-prediction denoiser with reverse-mode differentiation,
//! exposure-bias metrics, an analytic Wiener verification bed, two-phase
//! adaptive schedule construction, and proxy unrolled fine-tuning.

pub mod ks;
pub mod rng;
