//! TOML configuration. Relative paths resolve against the directory of the
//! config file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use pilot_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    #[default]
    Scripted,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub mode: ProviderMode,
    /// Rule table for scripted mode.
    pub rules: Option<PathBuf>,
    /// Simulated latency per scripted call.
    pub delay_ms: u64,
    pub light_endpoint: Option<String>,
    pub heavy_endpoint: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub timeout_ms: u64,
    pub max_retries: u32,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            mode: ProviderMode::Scripted,
            rules: None,
            delay_ms: 0,
            light_endpoint: None,
            heavy_endpoint: None,
            api_key_env: None,
            timeout_ms: 30_000,
            max_retries: pilot_core::llm::DEFAULT_MAX_RETRIES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMode {
    #[default]
    Reference,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub mode: EmbeddingMode,
    pub dimension: usize,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            mode: EmbeddingMode::Reference,
            dimension: pilot_core::ReferenceEmbedder::default().dimension,
            endpoint: None,
            timeout_ms: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryConfig {
    pub tau: f64,
    pub auto_store: bool,
    pub path: Option<PathBuf>,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        MemoryConfig { tau: pilot_core::memory::DEFAULT_TAU, auto_store: false, path: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub period_ms: u64,
    pub burst: u32,
    pub backoff_max_ms: u64,
    pub table_path: Option<PathBuf>,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            period_ms: pilot_core::stm::DEFAULT_PERIOD.as_millis() as u64,
            burst: pilot_core::stm::DEFAULT_BURST,
            backoff_max_ms: 60_000,
            table_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub provider: ProviderConfig,
    pub embedding: EmbeddingConfig,
    pub memory: MemoryConfig,
    pub scheduler: SchedulerConfig,
    pub skills_dir: PathBuf,
    /// Remote robot-sim base URL. Unset means an in-process simulator,
    /// served under `/api` next to the console API.
    pub robot_url: Option<String>,
    pub robot_timeout_ms: u64,
    pub api_port: u16,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            provider: ProviderConfig::default(),
            embedding: EmbeddingConfig::default(),
            memory: MemoryConfig::default(),
            scheduler: SchedulerConfig::default(),
            skills_dir: PathBuf::from("skills"),
            robot_url: None,
            robot_timeout_ms: 5_000,
            api_port: 8080,
            base_dir: PathBuf::from("."),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::parse(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.memory.tau > 0.0 && self.memory.tau <= 2.0) {
            return Err(Error::InvalidInput(format!("memory.tau must be in (0, 2], got {}", self.memory.tau)));
        }
        if self.scheduler.period_ms == 0 || self.scheduler.burst == 0 {
            return Err(Error::InvalidInput("scheduler.period_ms and scheduler.burst must be positive".into()));
        }
        if self.embedding.dimension == 0 {
            return Err(Error::InvalidInput("embedding.dimension must be positive".into()));
        }
        if self.provider.mode == ProviderMode::Http && self.provider.light_endpoint.is_none() {
            return Err(Error::InvalidInput("provider.light_endpoint is required in http mode".into()));
        }
        if self.embedding.mode == EmbeddingMode::Http && self.embedding.endpoint.is_none() {
            return Err(Error::InvalidInput("embedding.endpoint is required in http mode".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn period(&self) -> Duration {
        Duration::from_millis(self.scheduler.period_ms)
    }
}
