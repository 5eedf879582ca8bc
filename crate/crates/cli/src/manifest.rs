//! Run manifests: everything needed to reproduce a CSV byte for byte.

use std::path::Path;

use alcc_core::sim::ExperimentConfig;
use alcc_core::{AlccError, Result};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const GIT_REV: &str = env!("ALCC_GIT_REV");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config_path: String,
    pub output_dir: String,
    pub version: String,
    pub git: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    /// Fully resolved configuration, overrides applied.
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn new(
        config_path: &Path,
        output_dir: &Path,
        config: ExperimentConfig,
        outputs: Vec<String>,
    ) -> Self {
        Self {
            config_path: config_path.display().to_string(),
            output_dir: output_dir.display().to_string(),
            version: VERSION.to_string(),
            git: GIT_REV.to_string(),
            seed: config.seed,
            outputs,
            config,
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest is always representable as TOML")
    }
}

/// Either a plain experiment config or a manifest; a manifest yields its
/// recorded configuration with the recorded seed.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| AlccError::Config(e.to_string()))?;
    if table.contains_key("config") && table.contains_key("seed") {
        let m: RunManifest = toml::from_str(text).map_err(|e| AlccError::Config(e.to_string()))?;
        let mut cfg = m.config;
        cfg.seed = m.seed;
        cfg.validate()?;
        Ok(cfg)
    } else {
        ExperimentConfig::from_toml_str(text)
    }
}
