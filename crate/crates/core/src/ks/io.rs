//! Binary trajectory files: a fixed 32-byte header followed by little-endian
//! f32 states, plus a JSON sidecar carrying the manifest and grid. Round-trips
//! are bit-exact.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DatasetManifest, GridSpec, KsError, Trajectory};

const MAGIC: &[u8; 8] = b"KSTRAJ01";
const VERSION: u32 = 1;
const DTYPE_F32: u32 = 1;
const HEADER_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum TrajectoryIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic number: expected {MAGIC:?}")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported dtype tag {0}")]
    UnsupportedDtype(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("sidecar error: {0}")]
    Sidecar(String),
    #[error(transparent)]
    Invalid(#[from] KsError),
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    manifest: DatasetManifest,
    grid: GridSpec,
    t0s: Vec<f64>,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Write trajectories and the manifest sidecar. All trajectories must match
/// `grid`; the list may be empty.
pub fn save_trajectories(
    path: &Path,
    grid: &GridSpec,
    manifest: &DatasetManifest,
    trajectories: &[Trajectory],
) -> Result<(), TrajectoryIoError> {
    let states_per_traj = trajectories.first().map_or(0, |t| t.len());
    for (i, t) in trajectories.iter().enumerate() {
        if t.grid != *grid {
            return Err(TrajectoryIoError::ShapeMismatch(format!("trajectory {i} has a different grid")));
        }
        if t.len() != states_per_traj {
            return Err(TrajectoryIoError::ShapeMismatch(format!(
                "trajectory {i} has {} states, expected {states_per_traj}",
                t.len()
            )));
        }
    }

    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&(grid.num_points as u32).to_le_bytes());
    header.extend_from_slice(&(trajectories.len() as u32).to_le_bytes());
    header.extend_from_slice(&(states_per_traj as u32).to_le_bytes());
    header.extend_from_slice(&DTYPE_F32.to_le_bytes());
    header.extend_from_slice(&0u32.to_le_bytes());
    debug_assert_eq!(header.len(), HEADER_LEN);

    let mut file = fs::File::create(path)?;
    file.write_all(&header)?;
    let mut payload = Vec::with_capacity(trajectories.len() * states_per_traj * grid.num_points * 4);
    for t in trajectories {
        for state in &t.states {
            for v in state {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    file.write_all(&payload)?;

    let sidecar = Sidecar {
        manifest: *manifest,
        grid: *grid,
        t0s: trajectories.iter().map(|t| t.t0).collect(),
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| TrajectoryIoError::Sidecar(e.to_string()))?;
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

/// Load trajectories and the manifest written by [`save_trajectories`].
pub fn load_trajectories(path: &Path) -> Result<(Vec<Trajectory>, DatasetManifest), TrajectoryIoError> {
    let mut file = fs::File::open(path)?;
    let mut header = [0u8; HEADER_LEN];
    file.read_exact(&mut header).map_err(|_| TrajectoryIoError::Truncated {
        expected: HEADER_LEN,
        found: fs::metadata(path).map(|m| m.len() as usize).unwrap_or(0),
    })?;
    if &header[0..8] != MAGIC {
        return Err(TrajectoryIoError::BadMagic);
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        return Err(TrajectoryIoError::UnsupportedVersion(version));
    }
    let num_points = u32_at(12) as usize;
    let traj_count = u32_at(16) as usize;
    let states_per_traj = u32_at(20) as usize;
    let dtype = u32_at(24);
    if dtype != DTYPE_F32 {
        return Err(TrajectoryIoError::UnsupportedDtype(dtype));
    }

    let expected = traj_count * states_per_traj * num_points * 4;
    let mut payload = Vec::new();
    file.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(TrajectoryIoError::Truncated { expected, found: payload.len() });
    }

    let json = fs::read_to_string(sidecar_path(path))
        .map_err(|e| TrajectoryIoError::Sidecar(format!("missing sidecar: {e}")))?;
    let sidecar: Sidecar =
        serde_json::from_str(&json).map_err(|e| TrajectoryIoError::Sidecar(e.to_string()))?;
    if sidecar.grid.num_points != num_points {
        return Err(TrajectoryIoError::ShapeMismatch(format!(
            "sidecar grid has {} points, header says {num_points}",
            sidecar.grid.num_points
        )));
    }
    if sidecar.t0s.len() != traj_count {
        return Err(TrajectoryIoError::ShapeMismatch(format!(
            "sidecar has {} t0 entries, header says {traj_count}",
            sidecar.t0s.len()
        )));
    }

    let mut trajectories = Vec::with_capacity(traj_count);
    let mut off = 0;
    for i in 0..traj_count {
        let mut states = Vec::with_capacity(states_per_traj);
        for _ in 0..states_per_traj {
            let mut state = Vec::with_capacity(num_points);
            for _ in 0..num_points {
                state.push(f32::from_le_bytes(payload[off..off + 4].try_into().unwrap()));
                off += 4;
            }
            states.push(state);
        }
        trajectories.push(Trajectory::new(sidecar.grid, states, sidecar.t0s[i])?);
    }
    Ok((trajectories, sidecar.manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ks::Split;

    fn sample_data() -> (GridSpec, DatasetManifest, Vec<Trajectory>) {
        let grid = GridSpec::new(8, 64.0, 0.2, 4).unwrap();
        let manifest = DatasetManifest {
            split: Split::Test,
            trajectory_count: 2,
            trajectory_length: 2,
            seed: 3,
            viscosity: 1.0,
        };
        let t = |off: f32| {
            Trajectory::new(
                grid,
                vec![
                    (0..8).map(|i| off + i as f32 * 0.25).collect(),
                    (0..8).map(|i| off - i as f32 * 0.125).collect(),
                ],
                0.0,
            )
            .unwrap()
        };
        (grid, manifest, vec![t(0.0), t(1.5)])
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.traj");
        let (grid, manifest, trajs) = sample_data();
        save_trajectories(&path, &grid, &manifest, &trajs).unwrap();
        let (loaded, loaded_manifest) = load_trajectories(&path).unwrap();
        assert_eq!(loaded, trajs);
        assert_eq!(loaded_manifest, manifest);
    }

    #[test]
    fn empty_list_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.traj");
        let (grid, manifest, _) = sample_data();
        save_trajectories(&path, &grid, &manifest, &[]).unwrap();
        let (loaded, _) = load_trajectories(&path).unwrap();
        assert!(loaded.is_empty());
    }

    #[test]
    fn corrupted_magic_is_a_header_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.traj");
        let (grid, manifest, trajs) = sample_data();
        save_trajectories(&path, &grid, &manifest, &trajs).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] ^= 0xFF;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(load_trajectories(&path), Err(TrajectoryIoError::BadMagic)));
    }

    #[test]
    fn truncated_payload_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.traj");
        let (grid, manifest, trajs) = sample_data();
        save_trajectories(&path, &grid, &manifest, &trajs).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(load_trajectories(&path), Err(TrajectoryIoError::Truncated { .. })));
    }
}
