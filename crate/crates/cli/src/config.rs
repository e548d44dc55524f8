//! Config file and run-manifest formats.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use lumilink_core::sim::ExperimentConfig;
use lumilink_core::{SolverSettings, SystemParams};

use crate::CliError;

/// JSON configuration: any section or field may be omitted and takes its
/// default; unknown fields are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub params: SystemParams,
    pub settings: SolverSettings,
    pub experiment: ExperimentConfig,
}

pub fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid config file {}: {e}", path.display())))
}

/// Everything needed to reproduce a run byte-for-byte, written alongside the
/// outputs. The timestamp and version are informational; the seed and the
/// three config sections fully determine the results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp_utc: String,
    pub command: String,
    #[serde(default)]
    pub preset: Option<String>,
    pub seed: u64,
    pub params: SystemParams,
    pub settings: SolverSettings,
    pub experiment: ExperimentConfig,
}

impl RunManifest {
    pub fn new(
        command: &str,
        preset: Option<String>,
        params: SystemParams,
        settings: SolverSettings,
        experiment: ExperimentConfig,
    ) -> Self {
        Self {
            tool: "lumilink".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp_utc: chrono::Utc::now().to_rfc3339(),
            command: command.into(),
            preset,
            seed: experiment.seed,
            params,
            settings,
            experiment,
        }
    }
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid manifest {}: {e}", path.display())))
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::other(format!("cannot serialize manifest: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::other(format!("cannot write {}: {e}", path.display())))
}
