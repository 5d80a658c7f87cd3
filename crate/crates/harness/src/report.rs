//! Run artifacts: CSV ledgers, TOML summaries, and checkpoint pairs with a
//! sidecar. Nothing here embeds timestamps or absolute paths, so rerunning
//! an experiment from the same config reproduces every file byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use oldroyd_core::checkpoint::{load_field, save_field};
use oldroyd_core::{State, SymTensorField, VectorField};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// The same rows csv-encoded in memory, for printing to stdout.
pub fn csv_to_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Other(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, toml::to_string_pretty(value)?)?;
    Ok(())
}

/// Everything needed to pick a run back up, stored beside the field pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub t: f64,
    pub step_count: u64,
    pub config: ExperimentConfig,
}

fn checkpoint_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf, PathBuf) {
    (
        dir.join(format!("{name}-u.oldb")),
        dir.join(format!("{name}-tau.oldb")),
        dir.join(format!("{name}.toml")),
    )
}

pub fn save_checkpoint(dir: &Path, name: &str, state: &State, meta: &CheckpointMeta) -> Result<()> {
    let (u_path, tau_path, meta_path) = checkpoint_paths(dir, name);
    save_field(&u_path, state.u())?;
    save_field(&tau_path, state.tau())?;
    write_toml(&meta_path, meta)
}

pub fn load_checkpoint(dir: &Path, name: &str) -> Result<(State, CheckpointMeta)> {
    let (u_path, tau_path, meta_path) = checkpoint_paths(dir, name);
    let u: VectorField = load_field(&u_path)?;
    let tau: SymTensorField = load_field(&tau_path)?;
    let text = fs::read_to_string(&meta_path)?;
    let meta: CheckpointMeta = toml::from_str(&text)
        .map_err(|e| HarnessError::Other(format!("{}: {e}", meta_path.display())))?;
    let state = State::new(u, tau, meta.t)?;
    Ok((state, meta))
}
