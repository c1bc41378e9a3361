//! Trajectory generation: band-limited random initial conditions, a burn-in
//! window to reach the attractor, then recording at emulator cadence.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{DatasetManifest, GridSpec, KsError, KsSolver, Trajectory};
use crate::rng::{domain, stream};

#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    /// Time discarded before recording starts.
    pub burn_in_time: f64,
    /// Highest Fourier mode excited by the initial condition.
    pub ic_modes: usize,
    /// Fresh initial conditions tried per trajectory before giving up.
    pub max_retries: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self { burn_in_time: 50.0, ic_modes: 8, max_retries: 5 }
    }
}

/// Band-limited Gaussian random field on modes 1..=ic_modes, normalized to
/// unit spatial variance.
fn random_initial_condition<R: Rng>(rng: &mut R, grid: &GridSpec, ic_modes: usize) -> Vec<f64> {
    let n = grid.num_points;
    let mut spec = vec![Complex64::ZERO; n];
    for m in 1..=ic_modes.min(n / 2 - 1) {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let c = Complex64::new(re, im);
        spec[m] = c;
        spec[n - m] = c.conj();
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut spec);
    let u: Vec<f64> = spec.iter().map(|c| c.re / n as f64).collect();
    let mean = u.iter().sum::<f64>() / n as f64;
    let var = u.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let scale = if var > 0.0 { var.sqrt().recip() } else { 1.0 };
    u.iter().map(|v| (v - mean) * scale).collect()
}

fn generate_one(
    solver: &KsSolver,
    manifest: &DatasetManifest,
    opts: &GenOptions,
    index: usize,
) -> Result<Trajectory, KsError> {
    let grid = *solver.grid();
    let burn_steps = (opts.burn_in_time / grid.dt_solver).round() as usize;
    let mut rng = stream(manifest.seed, domain::DATA, index as u64);
    for _attempt in 0..opts.max_retries {
        let ic = random_initial_condition(&mut rng, &grid, opts.ic_modes);
        let mut u = match solver.advance(&ic, burn_steps) {
            Ok(u) => u,
            Err(KsError::Blowup { .. }) => continue,
            Err(e) => return Err(e),
        };
        let mut states: Vec<Vec<f32>> = Vec::with_capacity(manifest.trajectory_length);
        states.push(u.iter().map(|&v| v as f32).collect());
        let mut ok = true;
        for step in 1..manifest.trajectory_length {
            match solver.advance(&u, grid.stride) {
                Ok(next) => {
                    u = next;
                    states.push(u.iter().map(|&v| v as f32).collect());
                }
                Err(KsError::Blowup { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
            let _ = step;
        }
        if ok {
            return Trajectory::new(grid, states, 0.0);
        }
    }
    Err(KsError::GenerationFailed { seed: manifest.seed, index, retries: opts.max_retries })
}

/// Generate the dataset described by `manifest`. Identical inputs produce a
/// bit-identical dataset; trajectories are generated in parallel on
/// per-trajectory RNG streams.
pub fn generate_dataset(
    manifest: &DatasetManifest,
    grid: &GridSpec,
    opts: &GenOptions,
) -> Result<Vec<Trajectory>, KsError> {
    if manifest.trajectory_length < 2 {
        return Err(KsError::InvalidTrajectory("trajectory_length must be >= 2".into()));
    }
    let solver = KsSolver::new(*grid, manifest.viscosity);
    (0..manifest.trajectory_count)
        .into_par_iter()
        .map(|i| generate_one(&solver, manifest, opts, i))
        .collect()
}
