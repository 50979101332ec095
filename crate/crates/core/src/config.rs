//! Config files are TOML with optional `[detector]` and `[wytiwyg]` tables;
//! missing fields keep their defaults.
//!
//! ```toml
//! [detector]
//! hold_timeout_ms = 450
//!
//! [wytiwyg]
//! dwell_ms = 700
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detector::DetectorConfig;
use crate::error::{Error, Result};
use crate::wytiwyg::WytiwygConfig;

/// Names the config file used when no `--config` flag is given.
pub const CONFIG_ENV: &str = "ONEPRESS_CONFIG";

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub detector: DetectorConfig,
    pub wytiwyg: WytiwygConfig,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start].matches('\n').count() as u64 + 1)
                .unwrap_or(0);
            Error::parse(line, e.message().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.wytiwyg.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Explicit path first, then the environment variable, then defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        match explicit.map(Path::to_path_buf).or(from_env) {
            Some(path) => Self::load(&path),
            None => Ok(Self::default()),
        }
    }
}
