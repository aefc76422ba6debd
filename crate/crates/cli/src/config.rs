//! Where the CLI sends requests and how it prints replies.
//!
//! Each setting is taken from the first source that has it: command-line
//! flag, environment (`RUNLOG_ENDPOINT`, `RUNLOG_TOKEN`), then the config
//! file at `~/.config/runlog/config`.

use std::path::PathBuf;

use serde::Deserialize;
use thiserror::Error;
use url::Url;

pub const ENV_ENDPOINT: &str = "RUNLOG_ENDPOINT";
pub const ENV_TOKEN: &str = "RUNLOG_TOKEN";
pub const DEFAULT_ENDPOINT: &str = "http://127.0.0.1:8080";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    #[default]
    Table,
    /// Response bodies exactly as the service sent them.
    Raw,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("endpoint {0:?} is not an http(s) URL")]
    Endpoint(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    pub endpoint: Url,
    pub token: Option<String>,
    pub output: Output,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    endpoint: Option<String>,
    token: Option<String>,
    output: Option<Output>,
}

/// Values given on the command line, if any.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub endpoint: Option<String>,
    pub token: Option<String>,
    pub output: Option<Output>,
}

pub fn config_path(env: &dyn Fn(&str) -> Option<String>) -> Option<PathBuf> {
    env("HOME").map(|home| PathBuf::from(home).join(".config/runlog/config"))
}

pub fn parse_endpoint(text: &str) -> Result<Url, ConfigError> {
    match Url::parse(text) {
        Ok(url) if matches!(url.scheme(), "http" | "https") && url.has_host() => Ok(url),
        _ => Err(ConfigError::Endpoint(text.to_string())),
    }
}

impl CliConfig {
    /// `file` is the config file's path and text, when one exists.
    pub fn resolve(
        flags: &Overrides,
        env: &dyn Fn(&str) -> Option<String>,
        file: Option<(PathBuf, String)>,
    ) -> Result<Self, ConfigError> {
        let file = match file {
            Some((path, text)) => {
                toml::from_str::<ConfigFile>(&text).map_err(|e| ConfigError::File { path, message: e.to_string() })?
            }
            None => ConfigFile::default(),
        };
        let endpoint = flags
            .endpoint
            .clone()
            .or_else(|| env(ENV_ENDPOINT))
            .or(file.endpoint)
            .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string());
        Ok(CliConfig {
            endpoint: parse_endpoint(&endpoint)?,
            token: flags.token.clone().or_else(|| env(ENV_TOKEN)).or(file.token).filter(|t| !t.is_empty()),
            output: flags.output.or(file.output).unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn defaults_apply_without_any_source() {
        let c = CliConfig::resolve(&Overrides::default(), &no_env, None).unwrap();
        assert_eq!(c.endpoint.as_str(), "http://127.0.0.1:8080/");
        assert_eq!(c.token, None);
        assert_eq!(c.output, Output::Table);
    }

    #[test]
    fn flags_beat_env_beat_file() {
        let file = Some((PathBuf::from("c"), "endpoint = \"http://file:1\"\ntoken = \"f\"\noutput = \"raw\"".to_string()));
        let env = |k: &str| match k {
            ENV_ENDPOINT => Some("http://env:2".to_string()),
            _ => None,
        };
        let c = CliConfig::resolve(&Overrides::default(), &env, file.clone()).unwrap();
        assert_eq!(c.endpoint.host_str(), Some("env"));
        assert_eq!(c.token.as_deref(), Some("f"));
        assert_eq!(c.output, Output::Raw);
        let flags = Overrides { endpoint: Some("https://flag".into()), token: Some("t".into()), output: Some(Output::Table) };
        let c = CliConfig::resolve(&flags, &env, file).unwrap();
        assert_eq!(c.endpoint.host_str(), Some("flag"));
        assert_eq!(c.token.as_deref(), Some("t"));
        assert_eq!(c.output, Output::Table);
    }

    #[test]
    fn malformed_endpoints_and_files_are_rejected() {
        for bad in ["localhost:8080", "ftp://host", "http://", "not a url"] {
            let flags = Overrides { endpoint: Some(bad.into()), ..Default::default() };
            assert!(matches!(CliConfig::resolve(&flags, &no_env, None), Err(ConfigError::Endpoint(_))), "{bad}");
        }
        let file = Some((PathBuf::from("c"), "endpoint = 3".to_string()));
        assert!(matches!(CliConfig::resolve(&Overrides::default(), &no_env, file), Err(ConfigError::File { .. })));
        let file = Some((PathBuf::from("c"), "colour = \"red\"".to_string()));
        assert!(matches!(CliConfig::resolve(&Overrides::default(), &no_env, file), Err(ConfigError::File { .. })));
    }
}
