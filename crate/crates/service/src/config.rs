use std::path::{Path, PathBuf};
use std::time::Duration;

use peerhol::engine::{Engine, EngineConfig, EngineError};
use peerhol::store::{Store, StoreConfig, StoreError};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Read(PathBuf, String),
    #[error("bad configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Server settings. Read from a TOML file, then overridden by `PEERHOL_*`
/// environment variables.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    /// Store file; `None` keeps everything in memory.
    pub store: Option<PathBuf>,
    /// Replaces the built-in root theory when a store is first created.
    pub bootstrap: Option<PathBuf>,
    pub auto_repair: bool,
    pub session_idle_secs: u64,
}

impl Default for ServiceConfig {
    fn default() -> ServiceConfig {
        ServiceConfig {
            bind: "127.0.0.1".into(),
            port: 8080,
            store: None,
            bootstrap: None,
            auto_repair: true,
            session_idle_secs: 24 * 60 * 60,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(src: &str) -> Result<ServiceConfig, ConfigError> {
        toml::from_str(src).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Reads `path` if given, then applies the process environment.
    pub fn load(path: Option<&Path>) -> Result<ServiceConfig, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let src = std::fs::read_to_string(p).map_err(|e| ConfigError::Read(p.into(), e.to_string()))?;
                ServiceConfig::from_toml(&src)?
            }
            None => ServiceConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = var("PEERHOL_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("PEERHOL_PORT") {
            self.port = v.parse().map_err(|_| ConfigError::Invalid(format!("PEERHOL_PORT={v}")))?;
        }
        if let Some(v) = var("PEERHOL_STORE") {
            self.store = Some(v.into());
        }
        if let Some(v) = var("PEERHOL_BOOTSTRAP") {
            self.bootstrap = Some(v.into());
        }
        if let Some(v) = var("PEERHOL_AUTO_REPAIR") {
            self.auto_repair = v.parse().map_err(|_| ConfigError::Invalid(format!("PEERHOL_AUTO_REPAIR={v}")))?;
        }
        Ok(())
    }

    pub fn session_idle(&self) -> Duration {
        Duration::from_secs(self.session_idle_secs)
    }

    pub fn engine_config(&self) -> Result<EngineConfig, ConfigError> {
        let mut ec = EngineConfig { auto_repair: self.auto_repair, ..EngineConfig::default() };
        if let Some(p) = &self.bootstrap {
            ec.bootstrap = std::fs::read_to_string(p).map_err(|e| ConfigError::Read(p.clone(), e.to_string()))?;
        }
        Ok(ec)
    }

    pub fn open_engine(&self) -> Result<Engine, ConfigError> {
        let store = match &self.store {
            Some(p) => Store::open_file(p, StoreConfig::default())?,
            None => Store::memory(StoreConfig::default()),
        };
        Ok(Engine::open(store, self.engine_config()?)?)
    }
}
