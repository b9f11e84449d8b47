//! Experiment manifests: a JSON-archivable record of one command invocation.
//! Command-line flags override manifest keys; the fully resolved manifest is
//! written beside each CSV output for reproducibility.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("manifest parse: {e}")))
    }

    pub fn save_beside(&self, csv_path: &Path) -> Result<(), CliError> {
        let sidecar: PathBuf = csv_path.with_extension("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifests serialize infallibly");
        std::fs::write(&sidecar, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", sidecar.display())))
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.parameters.insert(key.to_string(), value);
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.parameters.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.parameters.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<f64>()
                .map_err(|e| CliError::Validation(format!("parameter {key}={raw}: {e}"))),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.parameters.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<usize>()
                .map_err(|e| CliError::Validation(format!("parameter {key}={raw}: {e}"))),
        }
    }

    /// Comma-separated list of horizons, e.g. `16,64,256`.
    pub fn get_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.parameters.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<usize>()
                        .map_err(|e| CliError::Validation(format!("parameter {key}={raw}: {e}")))
                })
                .collect(),
        }
    }
}
