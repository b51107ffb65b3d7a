use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hodgetrack_core::Tolerances;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::output::{suffixed, write_atomic};

/// Provenance record written next to the primary output of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: Option<InputDigest>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tolerances: ToleranceRecord,
    pub outputs: Vec<PathBuf>,
    pub duration_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRecord {
    pub zero: f64,
    pub residual: f64,
    pub degeneracy: f64,
    pub eigen_residual: f64,
}

impl From<Tolerances> for ToleranceRecord {
    fn from(t: Tolerances) -> Self {
        Self {
            zero: t.zero,
            residual: t.residual,
            degeneracy: t.degeneracy,
            eigen_residual: t.eigen_residual,
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collects parameters while a command runs, then writes the manifest.
#[derive(Debug)]
pub struct ManifestBuilder {
    command: String,
    input: Option<InputDigest>,
    parameters: BTreeMap<String, serde_json::Value>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            input: None,
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        self.input = Some(InputDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(self)
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.parameters.insert(key.to_owned(), value.into());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn finish(&self) -> RunManifest {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: self.command.clone(),
            input: self.input.clone(),
            parameters: self.parameters.clone(),
            tolerances: Tolerances::default().into(),
            outputs: self.outputs.clone(),
            duration_seconds: self.started.elapsed().as_secs_f64(),
        }
    }

    /// Writes `<primary>.manifest.json` and returns its path.
    pub fn write(&self, primary: &Path) -> Result<PathBuf, CliError> {
        let path = manifest_path(primary);
        let manifest = self.finish();
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Serialize(e.to_string()))?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    suffixed(primary, ".manifest.json")
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}
