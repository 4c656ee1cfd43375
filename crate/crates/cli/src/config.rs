//! Optional JSON config file. Every key is optional; a flag given on the
//! command line wins over the file, and the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    // simulate / export-spectra
    pub load: Option<f64>,
    pub onset: Option<f64>,
    pub duration: Option<f64>,
    pub sample_rate: Option<f64>,
    pub overload_factor: Option<f64>,
    pub harmonic_amplitude: Option<f64>,
    // generate / split
    pub plan: Option<PathBuf>,
    pub scale: Option<f64>,
    pub ratio: Option<f64>,
    // train / compare
    pub models: Option<Vec<String>>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub min_gain: Option<f64>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub c: Option<f64>,
    // export-pairs
    pub per_class: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}
