//! Solving through an outside MILP solver via MPS export and a plain-text
//! solution file.

use std::path::{Path, PathBuf};
use std::process::Command;

use gridflex_core::milp::mps::{self, MpsError, NameMap};
use gridflex_core::milp::{MilpInstance, RawSolution};
use serde::{Deserialize, Serialize};

use crate::io::{self, FileError};

/// Command line of the outside solver. `{mps}` and `{solution}` in the
/// arguments are replaced by the model and solution file paths. The solver
/// must write `<name> <value>` lines; a `# status optimal` comment line
/// marks a proven optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSolver {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Mps(#[from] MpsError),
    #[error("could not start `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("`{command}` exited with {status}")]
    Exit { command: String, status: String },
    #[error("{path}: {source}")]
    Import {
        path: PathBuf,
        #[source]
        source: MpsError,
    },
    #[error("solution violates the model by {0:.3e}")]
    Infeasible(f64),
}

/// Writes `<stem>.mps` and `<stem>.names.json` under `dir`.
pub fn write_model(instance: &MilpInstance, dir: &Path, stem: &str) -> Result<(PathBuf, NameMap), ExternalError> {
    let (text, map) = mps::export_mps(instance, stem)?;
    let mps_path = dir.join(format!("{stem}.mps"));
    io::write_text(&mps_path, &text)?;
    let names = serde_json::to_string_pretty(&map).expect("name maps serialize");
    io::write_text(&dir.join(format!("{stem}.names.json")), &names)?;
    Ok((mps_path, map))
}

pub fn read_solution(path: &Path, instance: &MilpInstance, map: &NameMap) -> Result<RawSolution, ExternalError> {
    let text = io::read_text(path)?;
    mps::import_solution(&text, instance, map).map_err(|source| ExternalError::Import {
        path: path.to_path_buf(),
        source,
    })
}

impl ExternalSolver {
    pub fn solve(&self, instance: &MilpInstance, dir: &Path, stem: &str) -> Result<RawSolution, ExternalError> {
        let (mps_path, map) = write_model(instance, dir, stem)?;
        let sol_path = dir.join(format!("{stem}.sol"));
        let _ = std::fs::remove_file(&sol_path);
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| {
                a.replace("{mps}", &mps_path.to_string_lossy())
                    .replace("{solution}", &sol_path.to_string_lossy())
            })
            .collect();
        let status = Command::new(&self.command)
            .args(&args)
            .status()
            .map_err(|source| ExternalError::Spawn {
                command: self.command.clone(),
                source,
            })?;
        if !status.success() {
            return Err(ExternalError::Exit {
                command: self.command.clone(),
                status: status.to_string(),
            });
        }
        let raw = read_solution(&sol_path, instance, &map)?;
        let viol = instance.max_violation(&raw.values);
        if viol > 1e-6 {
            return Err(ExternalError::Infeasible(viol));
        }
        Ok(raw)
    }
}
