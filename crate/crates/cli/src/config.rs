//! Run configuration: command-line flags over environment over config file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use activity_editor::agent::{ChatEndpoint, RetryPolicy};

pub const ENV_BASE_URL: &str = "ACTIVITY_EDITOR_BASE_URL";
pub const ENV_MODEL: &str = "ACTIVITY_EDITOR_MODEL";
pub const ENV_API_KEY: &str = "ACTIVITY_EDITOR_API_KEY";
pub const ENV_API_KEY_FILE: &str = "ACTIVITY_EDITOR_API_KEY_FILE";

/// Keys accepted in the TOML config file. There is deliberately no key
/// field: keys come from the environment or a key file only.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub api_key_file: Option<PathBuf>,
    pub temperature: Option<f64>,
    pub timeout_secs: Option<u64>,
    pub max_attempts: Option<u32>,
    pub max_rounds: Option<usize>,
    pub concurrency: Option<usize>,
    pub bounds: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub mock: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.api_key_file, &mut cfg.bounds, &mut cfg.rules, &mut cfg.mock]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Settings given on the command line.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct Overrides {
    /// Chat endpoint base URL (the part before /chat/completions)
    #[arg(long, global = true)]
    pub base_url: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// File holding the endpoint key
    #[arg(long, global = true)]
    pub api_key_file: Option<PathBuf>,
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    #[arg(long, global = true)]
    pub timeout_secs: Option<u64>,
    /// Total attempts per chat request
    #[arg(long, global = true)]
    pub max_attempts: Option<u32>,
    /// Attempts per generation stage before falling back
    #[arg(long, global = true)]
    pub max_rounds: Option<usize>,
    /// Generation sessions in flight
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    /// Duration-bounds overrides, e.g. {"work": [60, 600]}
    #[arg(long, global = true)]
    pub bounds: Option<PathBuf>,
    /// Commonsense rule set replacing the built-in one
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Rule-based mock endpoint file; no network calls are made
    #[arg(long, global = true)]
    pub mock: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub endpoint: ChatEndpoint,
    pub mock: Option<PathBuf>,
    pub bounds: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub max_rounds: usize,
    pub concurrency: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn resolve(flags: &Overrides, env: &dyn Fn(&str) -> Option<String>, file: ConfigFile) -> Result<Self> {
        let defaults = ChatEndpoint::default();
        let env_nonempty = |k: &str| env(k).filter(|v| !v.trim().is_empty());

        let key_file = flags
            .api_key_file
            .clone()
            .or_else(|| env_nonempty(ENV_API_KEY_FILE).map(PathBuf::from))
            .or(file.api_key_file);
        let api_key = match env_nonempty(ENV_API_KEY) {
            Some(k) => Some(k.trim().to_string()),
            None => match key_file {
                Some(path) => {
                    let k = std::fs::read_to_string(&path)
                        .with_context(|| format!("cannot read key file {}", path.display()))?;
                    Some(k.trim().to_string()).filter(|k| !k.is_empty())
                }
                None => None,
            },
        };

        let mut retry = defaults.retry;
        if let Some(n) = flags.max_attempts.or(file.max_attempts) {
            retry.max_attempts = n;
        }
        let mock = flags.mock.clone().or(file.mock);
        if mock.is_some() {
            retry = RetryPolicy::immediate(retry.max_attempts);
        }
        if retry.max_attempts == 0 {
            bail!("max_attempts must be at least 1");
        }

        let endpoint = ChatEndpoint {
            base_url: flags
                .base_url
                .clone()
                .or_else(|| env_nonempty(ENV_BASE_URL))
                .or(file.base_url)
                .unwrap_or(defaults.base_url),
            model: flags
                .model
                .clone()
                .or_else(|| env_nonempty(ENV_MODEL))
                .or(file.model)
                .unwrap_or(defaults.model),
            api_key,
            temperature: flags.temperature.or(file.temperature).unwrap_or(defaults.temperature),
            timeout: flags
                .timeout_secs
                .or(file.timeout_secs)
                .map(Duration::from_secs)
                .unwrap_or(defaults.timeout),
            retry,
        };
        let max_rounds = flags.max_rounds.or(file.max_rounds).unwrap_or(3);
        if max_rounds == 0 {
            bail!("max_rounds must be at least 1");
        }
        let concurrency = flags.concurrency.or(file.concurrency).unwrap_or(4);
        if concurrency == 0 {
            bail!("concurrency must be at least 1");
        }
        Ok(Self {
            endpoint,
            mock,
            bounds: flags.bounds.clone().or(file.bounds),
            rules: flags.rules.clone().or(file.rules),
            max_rounds,
            concurrency,
            seed: flags.seed.or(file.seed).unwrap_or(0),
        })
    }
}
