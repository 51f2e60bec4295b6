//! Server configuration, layered file < environment < flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENV_PREFIX: &str = "TRAILRAG_";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_CORS_ORIGIN: &str = "http://localhost:5173";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("environment variable {name}: {message}")]
    Env { name: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ServerConfig {
    pub bind: String,
    /// JSON snapshot file; `None` keeps the store in memory.
    pub store_path: Option<PathBuf>,
    /// Import the bundled corpus when the store starts out empty.
    pub load_fixture: bool,
    pub mock_llm: bool,
    /// Script for the mock model; without one it echoes its context.
    pub mock_script: Option<PathBuf>,
    pub mock_delay_us: u64,
    pub llm_endpoint: Option<String>,
    pub llm_model: String,
    pub llm_timeout_secs: u64,
    /// Remote embedder; `None` uses the offline reference embedder.
    pub embedder_endpoint: Option<String>,
    pub embedder_model: String,
    pub embedder_timeout_secs: u64,
    /// Remote embedder used only for scoring evaluations.
    pub eval_embedder_endpoint: Option<String>,
    pub default_k: usize,
    pub rag_enabled: bool,
    pub llm_routing: bool,
    pub cache_capacity: usize,
    pub session_ttl_secs: u64,
    pub cors_origins: Vec<String>,
    pub admin_enabled: bool,
    pub shutdown_grace_secs: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: DEFAULT_BIND.into(),
            store_path: None,
            load_fixture: true,
            mock_llm: true,
            mock_script: None,
            mock_delay_us: 100,
            llm_endpoint: None,
            llm_model: "default".into(),
            llm_timeout_secs: 30,
            embedder_endpoint: None,
            embedder_model: "default".into(),
            embedder_timeout_secs: 5,
            eval_embedder_endpoint: None,
            default_k: 5,
            rag_enabled: true,
            llm_routing: false,
            cache_capacity: 128,
            session_ttl_secs: 3600,
            cors_origins: vec![DEFAULT_CORS_ORIGIN.into()],
            admin_enabled: false,
            shutdown_grace_secs: 10,
        }
    }
}

/// One configuration source. Unset fields leave lower layers alone.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub bind: Option<String>,
    pub store_path: Option<PathBuf>,
    pub load_fixture: Option<bool>,
    pub mock_llm: Option<bool>,
    pub mock_script: Option<PathBuf>,
    pub mock_delay_us: Option<u64>,
    pub llm_endpoint: Option<String>,
    pub llm_model: Option<String>,
    pub llm_timeout_secs: Option<u64>,
    pub embedder_endpoint: Option<String>,
    pub embedder_model: Option<String>,
    pub embedder_timeout_secs: Option<u64>,
    pub eval_embedder_endpoint: Option<String>,
    pub default_k: Option<usize>,
    pub rag_enabled: Option<bool>,
    pub llm_routing: Option<bool>,
    pub cache_capacity: Option<usize>,
    pub session_ttl_secs: Option<u64>,
    pub cors_origins: Option<Vec<String>>,
    pub admin_enabled: Option<bool>,
    pub shutdown_grace_secs: Option<u64>,
}

macro_rules! merge_fields {
    ($cfg:expr, $layer:expr, plain: [$($p:ident),*], optional: [$($o:ident),*]) => {
        $(if let Some(v) = $layer.$p { $cfg.$p = v; })*
        $(if let Some(v) = $layer.$o { $cfg.$o = Some(v); })*
    };
}

impl ConfigLayer {
    pub fn from_toml(text: &str, path: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: shown.clone(), source })?;
        Self::from_toml(&text, &shown)
    }

    /// Read `TRAILRAG_<FIELD>` variables. Lists are comma separated; an
    /// empty value for an optional path or endpoint is ignored.
    pub fn from_env(vars: impl IntoIterator<Item = (String, String)>) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::default();
        for (name, value) in vars {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
            let key = key.to_ascii_lowercase();
            let err = |message: String| ConfigError::Env { name: name.clone(), message };
            let text = || (!value.trim().is_empty()).then(|| value.trim().to_string());
            match key.as_str() {
                "bind" => layer.bind = text(),
                "store_path" => layer.store_path = text().map(PathBuf::from),
                "load_fixture" => layer.load_fixture = Some(parse_bool(&value).map_err(err)?),
                "mock_llm" => layer.mock_llm = Some(parse_bool(&value).map_err(err)?),
                "mock_script" => layer.mock_script = text().map(PathBuf::from),
                "mock_delay_us" => layer.mock_delay_us = Some(parse_num(&value).map_err(err)?),
                "llm_endpoint" => layer.llm_endpoint = text(),
                "llm_model" => layer.llm_model = text(),
                "llm_timeout_secs" => layer.llm_timeout_secs = Some(parse_num(&value).map_err(err)?),
                "embedder_endpoint" => layer.embedder_endpoint = text(),
                "embedder_model" => layer.embedder_model = text(),
                "embedder_timeout_secs" => layer.embedder_timeout_secs = Some(parse_num(&value).map_err(err)?),
                "eval_embedder_endpoint" => layer.eval_embedder_endpoint = text(),
                "default_k" => layer.default_k = Some(parse_num(&value).map_err(err)?),
                "rag_enabled" => layer.rag_enabled = Some(parse_bool(&value).map_err(err)?),
                "llm_routing" => layer.llm_routing = Some(parse_bool(&value).map_err(err)?),
                "cache_capacity" => layer.cache_capacity = Some(parse_num(&value).map_err(err)?),
                "session_ttl_secs" => layer.session_ttl_secs = Some(parse_num(&value).map_err(err)?),
                "cors_origins" => {
                    layer.cors_origins =
                        Some(value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
                }
                "admin_enabled" => layer.admin_enabled = Some(parse_bool(&value).map_err(err)?),
                "shutdown_grace_secs" => layer.shutdown_grace_secs = Some(parse_num(&value).map_err(err)?),
                _ => return Err(err("unknown setting".into())),
            }
        }
        Ok(layer)
    }

    pub fn apply(self, cfg: &mut ServerConfig) {
        merge_fields!(cfg, self,
            plain: [bind, load_fixture, mock_llm, mock_delay_us, llm_model, llm_timeout_secs, embedder_model,
                    embedder_timeout_secs, default_k, rag_enabled, llm_routing, cache_capacity, session_ttl_secs,
                    cors_origins, admin_enabled, shutdown_grace_secs],
            optional: [store_path, mock_script, llm_endpoint, embedder_endpoint, eval_embedder_endpoint]);
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(format!("expected a boolean, got {other:?}")),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("expected a non-negative integer, got {v:?}"))
}

impl ServerConfig {
    /// Defaults, then each layer in order; later layers win.
    pub fn layered(layers: impl IntoIterator<Item = ConfigLayer>) -> Result<Self, ConfigError> {
        let mut cfg = ServerConfig::default();
        for layer in layers {
            layer.apply(&mut cfg);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Optional file, then the process environment, then `flags`.
    pub fn load(file: Option<&Path>, flags: ConfigLayer) -> Result<Self, ConfigError> {
        let file_layer = match file {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        let env_layer = ConfigLayer::from_env(std::env::vars())?;
        Self::layered([file_layer, env_layer, flags])
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.default_k == 0 {
            return invalid("default_k must be at least 1");
        }
        if self.cache_capacity == 0 {
            return invalid("cache_capacity must be at least 1");
        }
        match (self.mock_llm, &self.llm_endpoint) {
            (true, Some(_)) => {
                return invalid("both mock_llm and llm_endpoint are set; enable exactly one LLM backend")
            }
            (false, None) => return invalid("no LLM backend: set llm_endpoint or enable mock_llm"),
            _ => {}
        }
        if self.mock_script.is_some() && !self.mock_llm {
            return invalid("mock_script requires mock_llm");
        }
        if self.bind.parse::<std::net::SocketAddr>().is_err() {
            return invalid(&format!("bind {:?} is not a socket address", self.bind));
        }
        for origin in &self.cors_origins {
            if origin != "*" && !(origin.starts_with("http://") || origin.starts_with("https://")) {
                return invalid(&format!("CORS origin {origin:?} must be \"*\" or start with http:// or https://"));
            }
        }
        Ok(())
    }

    pub fn session_ttl(&self) -> Duration {
        Duration::from_secs(self.session_ttl_secs)
    }

    pub fn shutdown_grace(&self) -> Duration {
        Duration::from_secs(self.shutdown_grace_secs)
    }
}
