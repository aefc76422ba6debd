//! Service configuration: one TOML file, selected environment overrides.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use runlog_core::domain::{ActorRef, Role};
use runlog_core::store::DEFAULT_MAX_ATTACHMENT_BYTES;
use serde::Deserialize;
use thiserror::Error;

pub const ENV_CONFIG: &str = "RUNLOG_CONFIG";
pub const ENV_LISTEN: &str = "RUNLOG_LISTEN";
pub const ENV_STORE: &str = "RUNLOG_STORE";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Syntax { path: PathBuf, source: toml::de::Error },
    #[error("invalid listen address {0:?}")]
    Listen(String),
    #[error("token table: {0}")]
    Tokens(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenEntry {
    pub token: String,
    pub actor_id: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    /// Store directory.
    pub store: PathBuf,
    #[serde(default = "default_max_upload")]
    pub max_upload_bytes: u64,
    #[serde(default = "default_fsync")]
    pub fsync: bool,
    #[serde(default)]
    pub tokens: Vec<TokenEntry>,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_max_upload() -> u64 {
    DEFAULT_MAX_ATTACHMENT_BYTES
}

fn default_fsync() -> bool {
    true
}

impl ServiceConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Syntax { path: origin.to_path_buf(), source })
    }

    /// Reads `path`, or `$RUNLOG_CONFIG` when `path` is `None`, then applies
    /// `RUNLOG_LISTEN` and `RUNLOG_STORE`.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let path = match path {
            Some(p) => p.to_path_buf(),
            None => std::env::var_os(ENV_CONFIG)
                .map(PathBuf::from)
                .ok_or_else(|| ConfigError::Read {
                    path: PathBuf::from(format!("${ENV_CONFIG}")),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "no config file given"),
                })?,
        };
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
        let mut config = Self::parse(&text, &path)?;
        config.apply_env(|k| std::env::var(k).ok());
        config.validate()?;
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) {
        if let Some(listen) = var(ENV_LISTEN) {
            self.listen = listen;
        }
        if let Some(store) = var(ENV_STORE) {
            self.store = PathBuf::from(store);
        }
    }

    pub fn listen_addr(&self) -> Result<SocketAddr, ConfigError> {
        self.listen.parse().map_err(|_| ConfigError::Listen(self.listen.clone()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.listen_addr()?;
        self.token_table()?;
        Ok(())
    }

    pub fn token_table(&self) -> Result<HashMap<String, ActorRef>, ConfigError> {
        let mut table = HashMap::new();
        for entry in &self.tokens {
            if entry.token.is_empty() {
                return Err(ConfigError::Tokens(format!("empty token for {}", entry.actor_id)));
            }
            let actor = ActorRef::new(entry.actor_id.clone(), entry.role)
                .map_err(|e| ConfigError::Tokens(e.to_string()))?;
            if table.insert(entry.token.clone(), actor).is_some() {
                return Err(ConfigError::Tokens(format!("token for {} is listed twice", entry.actor_id)));
            }
        }
        Ok(table)
    }
}
