//! Service configuration, read from a TOML file.
//!
//! ```toml
//! bind = "127.0.0.1"
//! port = 8080                 # SWARMPLAY_PORT overrides
//! policy_path = "policy.json" # default for RL sessions
//! transcript_dir = "logs"     # omit to keep games in memory only
//! session_idle_secs = 1800
//!
//! [sim]                       # any SimConfig field
//! max_speed = 1.5
//!
//! [vision]                    # any VisionConfig field
//! threshold = 128
//! empty_max = 0.05
//! cross_max = 0.30
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swarmplay_core::sim::SimConfig;
use swarmplay_core::vision::VisionConfig;
use thiserror::Error;

pub const PORT_ENV: &str = "SWARMPLAY_PORT";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad {PORT_ENV} value {0:?}")]
    BadPort(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    pub policy_path: Option<PathBuf>,
    pub transcript_dir: Option<PathBuf>,
    pub session_idle_secs: u64,
    pub sim: SimConfig,
    pub vision: VisionConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1".into(),
            port: 8080,
            policy_path: None,
            transcript_dir: None,
            session_idle_secs: 1800,
            sim: SimConfig::default(),
            vision: VisionConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<ServiceConfig, ConfigError> {
        let cfg: ServiceConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ServiceConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.vision.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Applies a port override, as read from [`PORT_ENV`].
    pub fn with_port_override(mut self, value: Option<&str>) -> Result<ServiceConfig, ConfigError> {
        if let Some(v) = value {
            self.port = v.trim().parse().map_err(|_| ConfigError::BadPort(v.to_string()))?;
        }
        Ok(self)
    }

    pub fn with_env_port(self) -> Result<ServiceConfig, ConfigError> {
        let value = std::env::var(PORT_ENV).ok();
        self.with_port_override(value.as_deref())
    }
}
