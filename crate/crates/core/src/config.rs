//! Server configuration, read from TOML.
//!
//! ```toml
//! store_path = "./data"
//! bind = "127.0.0.1:8080"
//! facilitator_token = "change-me"
//!
//! [llm.default]
//! provider_kind = "mock_echo"
//!
//! [embedding.default]
//! kind = "trigram_fallback"
//!
//! [segment_minutes]
//! 1 = 10
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::affinity::EmbeddingProviderConfig;
use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::llm::{build_provider, Gateway, LlmProviderConfig, RetryPolicy};
use crate::session::Platform;
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub store_path: PathBuf,
    #[serde(default = "default_bind")]
    pub bind: String,
    /// Bearer token required on facilitator-only endpoints.
    pub facilitator_token: String,
    #[serde(default)]
    pub llm: BTreeMap<String, LlmProviderConfig>,
    #[serde(default)]
    pub embedding: BTreeMap<String, EmbeddingProviderConfig>,
    /// Advisory minutes per discussion segment; not enforced.
    #[serde(default)]
    pub segment_minutes: BTreeMap<String, u32>,
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative paths resolve against the config file's directory.
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.store_path.is_relative() {
            cfg.store_path = base.join(&cfg.store_path);
        }
        for llm in cfg.llm.values_mut() {
            if let Some(p) = llm.replay_path.as_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.facilitator_token.trim().is_empty() {
            return Err(Error::Config("facilitator_token must not be empty".into()));
        }
        for (name, llm) in &self.llm {
            llm.validate()
                .map_err(|e| Error::Config(format!("[llm.{name}]: {e}")))?;
        }
        self.segment_durations()?;
        Ok(())
    }

    pub fn segment_durations(&self) -> Result<BTreeMap<u8, u32>> {
        self.segment_minutes
            .iter()
            .map(|(k, v)| match k.parse::<u8>() {
                Ok(s @ 1..=5) => Ok((s, *v)),
                _ => Err(Error::Config(format!("unknown discussion segment `{k}`"))),
            })
            .collect()
    }

    /// Open the store and wire up every configured provider.
    pub fn build_platform(&self, clock: Arc<dyn Clock>) -> Result<Platform> {
        let store = Arc::new(Store::open(&self.store_path, clock)?);
        let mut gateway = Gateway::new(store.clone(), RetryPolicy::default());
        for (name, llm) in &self.llm {
            gateway.register(name.clone(), llm.clone(), build_provider(llm)?);
        }
        let embedding: HashMap<_, _> = self
            .embedding
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Ok(Platform::new(
            store,
            gateway,
            embedding,
            self.segment_durations()?,
        ))
    }
}
