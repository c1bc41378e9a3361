//! 1D Kuramoto-Sivashinsky datasets: a pseudo-spectral ETDRK4 integrator,
//! trajectory generation with burn-in, and a bit-exact on-disk format.

mod dataset;
mod io;
mod solver;

pub use dataset::{generate_dataset, GenOptions};
pub use io::{load_trajectories, save_trajectories, TrajectoryIoError};
pub use solver::{ks_step, KsSolver};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("state length {got} does not match grid num_points {want}")]
    StateLength { got: usize, want: usize },
    #[error("non-finite value in input state")]
    NonFiniteInput,
    #[error("KS integration blew up at solver step {step} (max |u| = {max_abs:.3e})")]
    Blowup { step: usize, max_abs: f64 },
    #[error("trajectory {index} of seed {seed} blew up during burn-in {retries} times; giving up")]
    GenerationFailed { seed: u64, index: usize, retries: usize },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}

/// Spatial grid and stepping cadence for the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Spatial samples on the periodic domain; must be a power of two.
    pub num_points: usize,
    /// Physical domain length.
    pub domain_length: f64,
    /// Solver timestep.
    pub dt_solver: f64,
    /// Solver steps per recorded emulator step.
    pub stride: usize,
}

impl GridSpec {
    pub fn new(num_points: usize, domain_length: f64, dt_solver: f64, stride: usize) -> Result<Self, KsError> {
        if num_points < 4 || !num_points.is_power_of_two() {
            return Err(KsError::InvalidGrid(format!("num_points {num_points} must be a power of two >= 4")));
        }
        if !(domain_length > 0.0) || !domain_length.is_finite() {
            return Err(KsError::InvalidGrid(format!("domain_length {domain_length} must be positive")));
        }
        if !(dt_solver > 0.0) || !dt_solver.is_finite() {
            return Err(KsError::InvalidGrid(format!("dt_solver {dt_solver} must be positive")));
        }
        if stride == 0 {
            return Err(KsError::InvalidGrid("stride must be >= 1".into()));
        }
        Ok(Self { num_points, domain_length, dt_solver, stride })
    }

    /// Default configuration: 256 points on a length-64 domain, dt 0.2,
    /// four solver steps per recorded state.
    pub fn default_config() -> Self {
        Self { num_points: 256, domain_length: 64.0, dt_solver: 0.2, stride: 4 }
    }

    /// Time between recorded states.
    pub fn emulator_dt(&self) -> f64 {
        self.dt_solver * self.stride as f64
    }
}

/// A time-ordered sequence of solver states at emulator cadence.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub states: Vec<Vec<f32>>,
    pub t0: f64,
}

impl Trajectory {
    pub fn new(grid: GridSpec, states: Vec<Vec<f32>>, t0: f64) -> Result<Self, KsError> {
        if states.len() < 2 {
            return Err(KsError::InvalidTrajectory(format!("need >= 2 states, got {}", states.len())));
        }
        for (i, s) in states.iter().enumerate() {
            if s.len() != grid.num_points {
                return Err(KsError::InvalidTrajectory(format!(
                    "state {i} has {} points, grid has {}",
                    s.len(),
                    grid.num_points
                )));
            }
            if !s.iter().all(|v| v.is_finite()) {
                return Err(KsError::InvalidTrajectory(format!("state {i} contains non-finite values")));
            }
        }
        Ok(Self { grid, states, t0 })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Spatial variance of each state, the energy proxy used for the
    /// stationarity checks.
    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| spatial_variance(s)).collect()
    }
}

pub(crate) fn spatial_variance(state: &[f32]) -> f64 {
    let n = state.len() as f64;
    let mean = state.iter().map(|&v| v as f64).sum::<f64>() / n;
    state.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n
}

/// Split identity plus the sizing knobs that fully determine a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Valid => write!(f, "valid"),
            Split::Test => write!(f, "test"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub split: Split,
    pub trajectory_count: usize,
    pub trajectory_length: usize,
    pub seed: u64,
    pub viscosity: f64,
}
